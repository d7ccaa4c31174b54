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

"""Best-of-N, stability, benchmark and instruction-ablation experiments"""

import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger
from tqdm import tqdm

from sawpframe.benchmark.cases import SAWPCase, load_cases
from sawpframe.errors import ReplayMissError
from sawpframe.grading.grader import MODES, Aggregate, aggregate_accuracy
from sawpframe.llm.config import ProviderConfig
from sawpframe.llm.gateway import Gateway
from sawpframe.pipeline.stages import Attempt, as_gateway, run_attempt
from sawpframe.prompts.forge import PromptOptions

Cell = Tuple[str, int]


def _frame(values: Mapping[Cell, Optional[float]], configs: Sequence[str], case_ids: Sequence[int]) -> pd.DataFrame:
    rows = [
        [np.nan if values.get((c, k)) is None else values[(c, k)] for k in case_ids]
        for c in configs
    ]
    return pd.DataFrame(rows, index=pd.Index(list(configs), name="config"),
                        columns=pd.Index(list(case_ids), name="case"), dtype=float)


@dataclass
class AccuracyMatrix:
    """Cells per (config, case): a solved flag in best-of-N mode or a
    success rate in stability mode, NaN where no attempt was graded.
    """
    mode: str
    cells: pd.DataFrame
    pass_at_1: pd.DataFrame
    histogram: Dict[str, Dict[str, int]] = field(default_factory=dict)
    infrastructure_failures: Dict[Cell, int] = field(default_factory=dict)
    attempts: Dict[Cell, List[Attempt]] = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def from_aggregate(
        cls,
        aggregate: Aggregate,
        configs: Sequence[str],
        case_ids: Sequence[int],
        attempts: Optional[Dict[Cell, List[Attempt]]] = None,
    ) -> "AccuracyMatrix":
        return cls(
            mode=aggregate.mode,
            cells=_frame(aggregate.cells, configs, case_ids),
            pass_at_1=_frame(aggregate.pass_at_1, configs, case_ids),
            histogram={c: aggregate.histogram.get(c, {}) for c in configs},
            infrastructure_failures=dict(aggregate.infrastructure_failures),
            attempts=attempts or {},
        )

    @property
    def configs(self) -> List[str]:
        return list(self.cells.index)

    @property
    def case_ids(self) -> List[int]:
        return [int(k) for k in self.cells.columns]

    def cell(self, config: str, case_id: int) -> Optional[float]:
        value = self.cells.loc[config, case_id]
        return None if math.isnan(value) else float(value)

    def overall(self, config: str) -> float:
        """Mean over the graded cases of a config"""
        return float(self.cells.loc[config].mean(skipna=True))

    def solved_cases(self, config: str) -> List[int]:
        row = self.cells.loc[config]
        return [int(k) for k, v in row.items() if v == 1.0]

    def summary(self) -> pd.DataFrame:
        """One row per config: overall accuracy, solved and graded cases"""
        return pd.DataFrame(
            {
                "overall": [self.overall(c) for c in self.configs],
                "solved": [len(self.solved_cases(c)) for c in self.configs],
                "graded": [int(self.cells.loc[c].notna().sum()) for c in self.configs],
            },
            index=self.cells.index,
        )

    def to_dict(self) -> Dict:
        def row(frame, config):
            return {str(k): (None if math.isnan(v) else float(v)) for k, v in frame.loc[config].items()}

        return {
            "mode": self.mode,
            "configs": [
                {
                    "label": c,
                    "overall": None if math.isnan(self.overall(c)) else self.overall(c),
                    "cells": row(self.cells, c),
                    "pass_at_1": row(self.pass_at_1, c),
                    "histogram": self.histogram.get(c, {}),
                    "infrastructure_failures": {
                        str(k): v for (label, k), v in sorted(self.infrastructure_failures.items()) if label == c
                    },
                }
                for c in self.configs
            ],
        }


def _attempts(
    case: SAWPCase,
    count: int,
    options: PromptOptions,
    gateway: Gateway,
    store=None,
    label: Optional[str] = None,
) -> List[Attempt]:
    attempts = []
    for index in range(count):
        attempt = run_attempt(case, index, options, gateway)
        if store is not None:
            store.write_attempt(label or gateway.config.label, attempt)
        attempts.append(attempt)
    return attempts


def run_case_best_of_n(
    case: SAWPCase,
    n: int = 3,
    options: PromptOptions = PromptOptions(),
    gateway: Union[Gateway, ProviderConfig, None] = None,
    store=None,
) -> Tuple[bool, List[Attempt]]:
    """Makes ``n`` independent attempts at a case.

    Args:
        case (SAWPCase): the case
        n (int, optional): attempts. Defaults to 3.
        options (PromptOptions, optional): prompt options
        gateway (Union[Gateway, ProviderConfig]): completion source
        store (RunStore, optional): where attempts are persisted

    Raises:
        ValueError: n < 1
        ReplayMissError: replaying a set without one of the requests

    Returns:
        Tuple[bool, List[Attempt]]: whether any attempt was fully correct,
            and every attempt
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if gateway is None:
        raise ValueError("A gateway or provider config is required")
    attempts = _attempts(case, n, options, as_gateway(gateway), store)
    return any(a.solved for a in attempts), attempts


def run_stability(
    case: SAWPCase,
    repeats: int = 5,
    options: PromptOptions = PromptOptions(),
    gateway: Union[Gateway, ProviderConfig, None] = None,
    store=None,
    label: Optional[str] = None,
) -> Tuple[Optional[float], List[Attempt]]:
    """Repeats single attempts at a case.

    Returns:
        Tuple[Optional[float], List[Attempt]]: fraction of graded attempts
            that were fully correct (None when none was graded), and every
            attempt
    """
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    if gateway is None:
        raise ValueError("A gateway or provider config is required")
    attempts = _attempts(case, repeats, options, as_gateway(gateway), store, label)
    graded = [a for a in attempts if a.infrastructure_error is None]
    if not graded:
        return None, attempts
    return sum(a.solved for a in graded) / len(graded), attempts


def run_benchmark(
    configs: Sequence[Union[Gateway, ProviderConfig]],
    cases: Optional[Sequence[SAWPCase]] = None,
    mode: str = "best_of_n",
    options: PromptOptions = PromptOptions(),
    n: int = 3,
    repeats: int = 5,
    store=None,
    workers: int = 4,
    progress: bool = False,
) -> AccuracyMatrix:
    """Runs every case under every config.

    Args:
        configs (Sequence[Union[Gateway, ProviderConfig]]): one matrix row each
        cases (Optional[Sequence[SAWPCase]], optional): defaults to all 20
        mode (str, optional): ``best_of_n`` or ``stability``
        options (PromptOptions, optional): prompt options
        n (int, optional): attempts per case in best-of-N mode. Defaults to 3.
        repeats (int, optional): attempts per case in stability mode.
            Defaults to 5.
        store (RunStore, optional): persists attempts, matrix and histogram
        workers (int, optional): concurrent cases. Defaults to 4.
        progress (bool, optional): show a progress bar. Defaults to False.

    Raises:
        ValueError: unknown mode or two configs with the same label
        ReplayMissError: replaying a set without one of the requests

    Returns:
        AccuracyMatrix: per-case cells, overall accuracy per config and the
            error histogram
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    gateways = [as_gateway(c) for c in configs]
    labels = [g.config.label for g in gateways]
    if len(set(labels)) != len(labels):
        raise ValueError(f"Config labels must be unique, got {labels}")
    cases = list(cases) if cases is not None else load_cases()
    case_ids = [c.id for c in cases]
    count = n if mode == "best_of_n" else repeats

    groups: Dict[Cell, List[Attempt]] = {}
    jobs = [(g, case) for g in gateways for case in cases]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        futures = {executor.submit(_attempts, case, count, options, g, store): (g.config.label, case.id) for g, case in jobs}
        for future in tqdm(as_completed(futures), total=len(futures), disable=not progress):
            label, case_id = futures[future]
            try:
                groups[label, case_id] = future.result()
            except ReplayMissError:
                raise
            except Exception as e:
                logger.exception("{} case {} failed: {}", label, case_id, e)
                groups[label, case_id] = [
                    Attempt(case_id, index, infrastructure_error=f"{type(e).__name__}: {e}") for index in range(count)
                ]

    matrix = AccuracyMatrix.from_aggregate(aggregate_accuracy(groups, mode), labels, case_ids, groups)
    for label in labels:
        logger.info("{}: {:.0%} over {} cases", label, matrix.overall(label) if case_ids else 0.0, len(case_ids))
    if store is not None:
        store.write_matrix(matrix)
    return matrix


def condition_options(condition: Union[str, Iterable[str]], exemplar: int = 1) -> PromptOptions:
    """Prompt options of an ablation condition: ``all``, ``none``, one
    instruction id, or ids joined with ``+``
    """
    if isinstance(condition, str) and condition not in ("all", "none"):
        condition = tuple(condition.split("+"))
    return PromptOptions(instructions=condition, exemplar=exemplar)


def run_ablation(
    case: SAWPCase,
    conditions: Sequence[Union[str, Iterable[str]]] = ("all", "none"),
    repeats: int = 10,
    gateway: Union[Gateway, ProviderConfig, None] = None,
    exemplar: int = 1,
    store=None,
) -> Dict[str, Optional[float]]:
    """Success rate of a case under each instruction condition.

    Returns:
        Dict[str, Optional[float]]: rate per condition label
    """
    if gateway is None:
        raise ValueError("A gateway or provider config is required")
    gateway = as_gateway(gateway)
    rates = {}
    for condition in conditions:
        options = condition_options(condition, exemplar)
        label = f"{gateway.config.label}[{options.label()}]"
        rates[options.label()], _ = run_stability(case, repeats, options, gateway, store, label)
    return rates
