# Copyright 2026 Rosalind Franklin Institute
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing,
# software distributed under the License is distributed on an
# "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND,
# either express or implied. See the License for the specific
# language governing permissions and limitations under the License.

# Utility imports
import unittest
import sys
import os
import sawpframe
from sawpframe.ui import cli


class ImportModuleTest(unittest.TestCase):
    """
    Tests the sawpframe package can be imported and its entry point runs.
    """

    def test_sawpframe_imported(self):
        """
        Tests that the package is importable from the root of the project.
        """
        self.assertTrue("sawpframe" in sys.modules.keys())

    def test_sawp_entrypoint(self):
        """
        Tests that the entry point for sawp works
        """
        exit_status = os.system("sawp -h")
        self.assertEqual(exit_status, 0)

    def test_main_help_exit_status(self):
        """
        Tests that help through main() returns 0 instead of exiting
        """
        self.assertEqual(cli.main(["-h"]), 0)


if __name__ == '__main__':
    unittest.main()
