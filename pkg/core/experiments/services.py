"""
Experiment orchestration: design, label, simulate and reproduce runs, with
their JSON/CSV artifacts.
"""

import json
import logging
from pathlib import Path
from typing import Any, Callable, Iterable, Optional

import numpy as np
from pydantic import ValidationError

from core.baselines.services import decoupled_constellation
from core.channel.schema import EqualizerSet
from core.channel.services import (
    crosstalk_channel,
    identity_equalizers,
    lmmse_equalizer,
    svd_equalizers,
    zf_equalizer,
)
from core.designer.schema import DesignResult
from core.designer.services import DesignerService
from core.errors import ConfigError, CskError, InvalidInputError
from core.experiments import reference
from core.experiments.schema import RunConfig
from core.labeling.services import LabelingService, random_labeling
from core.model.schema import COLOR_PROFILES, BerReport, Constellation, DesignSpec, LabelingMap
from core.model.services import power_gain_db
from core.rng import make_generator
from core.simulate.schema import SimConfig
from core.simulate.services import SimulationService, noise_param_from_osnr
from core.utils import read_csv, write_csv, write_json

logger = logging.getLogger(__name__)

CONSTELLATION_FILE = "constellation.json"
DESIGN_SUMMARY_FILE = "design_summary.csv"
LABELING_FILE = "labeling.json"
BER_FILE = "ber.csv"
DIFF_FILE = "diff_vs_paper.csv"

BER_HEADER = ("osnr_db", "n_bits", "bit_errors", "ber", "symbol_errors", "ser", "avg_bit_err_per_sym_err")
DESIGN_SUMMARY_HEADER = (
    "profile", "avg_power", "crosstalk_eps", "papr_alpha", "equalizer", "restarts", "seed",
    "med", "t_star", "iterations", "start_index", "feasible", "baseline_med", "power_gain_db",
)
DIFF_HEADER = ("target", "cell", "reference", "measured", "rel_deviation")

EPSILON_GRID = (0.0, 0.05, 0.1, 0.15, 0.2)
PAPR_GRID = (1.5, 2.0, 4.0, 6.0)
FIG_OSNR_GRID = tuple(float(v) for v in range(0, 13))
FIG5_OSNR_DB = 5.0
FIG6_EPS = 0.1
RANDOM_LABELINGS = 100
NEAR_BEST_RATIO = 0.99
HIST_BINS = 20
# relative to the peak coordinate; saved points carry 6 decimals
LOADED_INTENSITY_TOL = 1e-5

ALL_TARGETS = ("table1", "table3", "fig4", "table2", "fig2", "fig3", "fig5", "fig6")


def parse_config_file(path: str | Path) -> dict[str, str]:
    """
    Reads ``key = value`` lines; ``#`` starts a comment.

    Raises:
        ConfigError: If the file is missing or a line has no '='
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            lines = f.readlines()
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}")

    values: dict[str, str] = {}
    for number, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{number}: expected 'key = value', got '{raw.strip()}'")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = value
    return values


def build_run_config(config_path: Optional[str | Path] = None, overrides: Optional[dict[str, Any]] = None) -> RunConfig:
    """
    Builds a RunConfig from an optional config file, then flag overrides.

    Args:
        config_path: Optional key-value config file
        overrides: Flag values; None entries are ignored

    Returns:
        Validated RunConfig

    Raises:
        ConfigError: On unknown keys or invalid values
    """
    values: dict[str, Any] = parse_config_file(config_path) if config_path else {}
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return RunConfig(**values)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in e.errors()
        )
        raise ConfigError(f"Invalid configuration: {problems}")


def load_constellation(path: str | Path) -> Constellation:
    try:
        with open(path, "r", encoding="utf-8") as f:
            payload = json.load(f)
        return Constellation.from_array(np.asarray(payload["points"], dtype=float), payload["domain_tag"])
    except (OSError, KeyError, ValueError, TypeError) as e:
        raise InvalidInputError(f"Cannot load constellation from {path}: {e}")


def load_labeling(path: str | Path) -> LabelingMap:
    try:
        with open(path, "r", encoding="utf-8") as f:
            payload = json.load(f)
        return LabelingMap(
            bits_per_symbol=payload["bits_per_symbol"],
            word_of_symbol=tuple(payload["word_of_symbol"]),
            cost=payload["cost"],
        )
    except (OSError, KeyError, ValueError, TypeError) as e:
        raise InvalidInputError(f"Cannot load labeling from {path}: {e}")


def load_ber_csv(path: str | Path, bits_per_symbol: int) -> BerReport:
    try:
        rows = read_csv(path)
        return BerReport(
            osnr_db=tuple(float(r["osnr_db"]) for r in rows),
            bits_per_symbol=bits_per_symbol,
            n_bits=int(rows[0]["n_bits"]),
            bit_errors=tuple(int(r["bit_errors"]) for r in rows),
            symbol_errors=tuple(int(r["symbol_errors"]) for r in rows),
        )
    except (OSError, KeyError, ValueError, IndexError) as e:
        raise InvalidInputError(f"Cannot load BER report from {path}: {e}")


def constellation_payload(result: DesignResult, config: RunConfig) -> dict[str, Any]:
    c = result.constellation
    return {
        "dim": c.dim,
        "domain_tag": c.domain_tag,
        "points": [list(p) for p in c.points],
        "med": c.med,
        "t_star": result.t_star,
        "restart_meds": list(result.restart_meds),
        "failed_restarts": result.failed_restarts,
        "crosstalk_eps": config.crosstalk_eps,
        "avg_power": config.avg_power,
    }


def write_ber_csv(path: str | Path, report: BerReport) -> Path:
    return write_csv(path, BER_HEADER, report.rows())


def _rel(measured: float, ref: float) -> float:
    return float((measured - ref) / ref) if ref else float("nan")


class ExperimentService:
    """
    Ties the designer, labeler and simulator together for command runs.
    """

    def __init__(
        self,
        designer: DesignerService,
        labeler: LabelingService,
        simulator: SimulationService,
    ):
        self.designer = designer
        self.labeler = labeler
        self.simulator = simulator

    @staticmethod
    def svd_pre(eps: float) -> np.ndarray:
        """SVD pre-equalizer P = V S^-1 of the cross-talk channel."""
        return svd_equalizers(crosstalk_channel(eps)).pre

    def run_pre_equalizer(self, config: RunConfig) -> Optional[np.ndarray]:
        return self.svd_pre(config.crosstalk_eps) if config.equalizer == "svd-pre" else None

    def design(self, spec: DesignSpec, pre_equalizer: Optional[np.ndarray] = None) -> DesignResult:
        return self.designer.multi_start_design(spec, pre_equalizer)

    def equalizers_for(self, kind: str, eps: float, constellation: Constellation, n0: float) -> EqualizerSet:
        channel = crosstalk_channel(eps)
        if kind == "identity":
            return identity_equalizers(channel.n_leds)
        if kind == "svd-pre":
            return svd_equalizers(channel)
        if kind == "zf":
            return zf_equalizer(channel)
        if kind == "lmmse":
            return lmmse_equalizer(channel, constellation, n0)
        raise InvalidInputError(f"Unknown equalizer kind {kind}")

    def label(self, constellation: Constellation, config: RunConfig, osnr_db: Optional[float] = None) -> LabelingMap:
        osnr = config.label_osnr_db if osnr_db is None else osnr_db
        n0 = noise_param_from_osnr(osnr, config.avg_power, config.noise_n_blue)
        return self.labeler.bsa_optimize(constellation, n0, config.seed)

    def simulate(
        self,
        constellation: Constellation,
        labeling: LabelingMap,
        config: RunConfig,
        kind: Optional[str] = None,
        eps: Optional[float] = None,
        osnr_db_grid: Optional[Iterable[float]] = None,
        spec: Optional[DesignSpec] = None,
        intensity_tol: Optional[float] = None,
    ) -> BerReport:
        kind = kind or config.equalizer_kind
        eps = config.crosstalk_eps if eps is None else eps
        grid = tuple(osnr_db_grid) if osnr_db_grid is not None else config.osnr_db_grid
        spec = spec or config.design_spec()
        n0 = noise_param_from_osnr(grid[0], config.avg_power, config.noise_n_blue)
        sim = SimConfig(
            osnr_db_grid=grid,
            n_bits=config.n_bits,
            seed=config.seed,
            equalizer_kind=kind,
            channel=crosstalk_channel(eps),
            noise_n_blue=config.noise_n_blue,
        )
        equalizers = self.equalizers_for(kind, eps, constellation, n0)
        return self.simulator.run_ber(constellation, labeling, equalizers, sim, spec, intensity_tol)

    def cmd_design(self, config: RunConfig) -> list[Path]:
        """
        Designs a constellation and writes constellation.json and design_summary.csv.
        """
        spec = self._stage("spec", config.design_spec)
        pre = self._stage("equalizer", lambda: self.run_pre_equalizer(config))
        result = self._stage("design", lambda: self.design(spec, pre))

        out = Path(config.out_dir)
        paths = [write_json(out / CONSTELLATION_FILE, constellation_payload(result, config))]

        baseline_med, gain = "", ""
        if spec.led_counts == (1, 1, 1):
            baseline_med = decoupled_constellation(spec.color_fractions, spec.avg_power).joint.med
            gain = power_gain_db(result.med, baseline_med)
        profile = config.profile if config.color_fractions is None else "custom"
        paths.append(write_csv(out / DESIGN_SUMMARY_FILE, DESIGN_SUMMARY_HEADER, [(
            profile, config.avg_power, config.crosstalk_eps,
            "" if config.papr_alpha is None else config.papr_alpha,
            config.equalizer, config.restarts, config.seed,
            result.med, result.t_star, result.iterations, result.start_index,
            int(result.feasible), baseline_med, gain,
        )]))
        logger.info("design written to %s (MED %.6f)", out, result.med)
        return paths

    def cmd_label(self, config: RunConfig, constellation_path: str | Path) -> list[Path]:
        """
        Runs BSA on a saved constellation and writes labeling.json.
        """
        constellation = self._stage("load", lambda: load_constellation(constellation_path))
        if constellation.n_symbols != config.n_symbols:
            raise InvalidInputError(
                f"Constellation has {constellation.n_symbols} points but n_symbols={config.n_symbols}"
            )
        labeling = self._stage("label", lambda: self.label(constellation, config))
        n0 = noise_param_from_osnr(config.label_osnr_db, config.avg_power, config.noise_n_blue)
        path = write_json(Path(config.out_dir) / LABELING_FILE, {
            "bits_per_symbol": labeling.bits_per_symbol,
            "word_of_symbol": list(labeling.word_of_symbol),
            "words_binary": [format(w, f"0{labeling.bits_per_symbol}b") for w in labeling.word_of_symbol],
            "cost": labeling.cost,
            "design_osnr_db": config.label_osnr_db,
            "n0": n0,
        })
        return [path]

    def cmd_simulate(self, config: RunConfig, constellation_path: str | Path, labeling_path: str | Path) -> list[Path]:
        """
        Simulates a saved constellation/labeling pair and writes ber.csv.
        """
        constellation = self._stage("load", lambda: load_constellation(constellation_path))
        labeling = self._stage("load", lambda: load_labeling(labeling_path))
        tol = LOADED_INTENSITY_TOL * max(1.0, float(np.abs(constellation.array).max()))
        report = self._stage("simulate", lambda: self.simulate(constellation, labeling, config, intensity_tol=tol))
        return [write_ber_csv(Path(config.out_dir) / BER_FILE, report)]

    def cmd_reproduce(self, config: RunConfig, target: str) -> list[Path]:
        """
        Re-runs a published table or figure and writes its CSV plus diff_vs_paper.csv.
        """
        runners: dict[str, Callable[[RunConfig], tuple[list[Path], list[tuple]]]] = {
            "table1": self.reproduce_table1,
            "table2": self.reproduce_table2,
            "table3": self.reproduce_table3,
            "fig2": lambda c: self.reproduce_ber_vs_osnr(c, "fig2", "balanced"),
            "fig3": lambda c: self.reproduce_ber_vs_osnr(c, "fig3", "extreme"),
            "fig4": self.reproduce_fig4,
            "fig5": self.reproduce_fig5,
            "fig6": self.reproduce_fig6,
        }
        targets = ALL_TARGETS if target == "all" else (target,)
        paths: list[Path] = []
        diff_rows: list[tuple] = []
        for name in targets:
            if name not in runners:
                raise InvalidInputError(f"Unknown reproduction target '{name}'")
            logger.info("reproducing %s", name)
            files, rows = self._stage(name, lambda: runners[name](config))
            paths += files
            diff_rows += rows
        paths.append(write_csv(Path(config.out_dir) / DIFF_FILE, DIFF_HEADER, diff_rows))
        return paths

    def reproduce_table1(self, config: RunConfig) -> tuple[list[Path], list[tuple]]:
        rows, diff = [], []
        for alpha in PAPR_GRID:
            for profile in reference.PROFILES:
                spec = config.design_spec(color_fractions=COLOR_PROFILES[profile], papr_alpha=alpha)
                med = self.design(spec).med
                rows.append((alpha, profile, med))
                ref = reference.TABLE1_MED[(alpha, profile)]
                diff.append(("table1", f"alpha={alpha:g} {profile}", ref, med, _rel(med, ref)))
        path = write_csv(Path(config.out_dir) / "table1.csv", ("papr_alpha", "profile", "med"), rows)
        return [path], diff

    def reproduce_table3(self, config: RunConfig) -> tuple[list[Path], list[tuple]]:
        rows, diff = [], []
        for eps in EPSILON_GRID:
            pre = self.svd_pre(eps)
            for profile in reference.PROFILES:
                spec = config.design_spec(color_fractions=COLOR_PROFILES[profile], crosstalk_eps=eps, papr_alpha=None)
                med = self.design(spec, pre).med
                rows.append((eps, profile, med))
                ref = reference.TABLE3_MED[(eps, profile)]
                diff.append(("table3", f"eps={eps:g} {profile}", ref, med, _rel(med, ref)))
        path = write_csv(Path(config.out_dir) / "table3.csv", ("epsilon", "profile", "med"), rows)
        return [path], diff

    def reproduce_fig4(self, config: RunConfig) -> tuple[list[Path], list[tuple]]:
        spec = config.design_spec(color_fractions=COLOR_PROFILES["balanced"], restarts=config.hist_runs, papr_alpha=None)
        result = self.design(spec)
        meds = np.asarray(result.restart_meds)
        counts, edges = np.histogram(meds, bins=HIST_BINS)
        best = float(meds.max())
        near_best = float(np.mean(meds >= NEAR_BEST_RATIO * best))
        out = Path(config.out_dir)
        paths = [
            write_csv(out / "fig4_hist.csv", ("bin_lo", "bin_hi", "count"),
                      [(float(lo), float(hi), int(n)) for lo, hi, n in zip(edges[:-1], edges[1:], counts)]),
            write_csv(out / "fig4_summary.csv", ("n_runs", "failed_restarts", "best_med", "near_best_fraction"),
                      [(len(meds), result.failed_restarts, best, near_best)]),
        ]
        ref = reference.FIG4_NEAR_BEST_FRACTION
        return paths, [("fig4", "share of restarts within 1% of the best MED", ref, near_best, _rel(near_best, ref))]

    def reproduce_table2(self, config: RunConfig) -> tuple[list[Path], list[tuple]]:
        spec = config.design_spec(color_fractions=COLOR_PROFILES["balanced"], papr_alpha=None)
        constellation = self.design(spec).constellation
        labeling = self.label(constellation, config)
        grid = (config.label_osnr_db,)
        bsa_avg = self.simulate(constellation, labeling, config, "identity", 0.0, grid, spec) \
            .avg_bit_errors_per_symbol_error[0]

        rng = make_generator(config.seed, RANDOM_LABELINGS)
        random_avgs = []
        for _ in range(RANDOM_LABELINGS):
            report = self.simulate(constellation, random_labeling(labeling.bits_per_symbol, rng),
                                   config, "identity", 0.0, grid, spec)
            random_avgs.append(report.avg_bit_errors_per_symbol_error[0])
        random_avg = float(np.mean(random_avgs))

        bits = labeling.bits_per_symbol
        table_rows = [
            (i, *(float(v) for v in point), format(word, f"0{bits}b"))
            for i, (point, word) in enumerate(zip(constellation.points, labeling.word_of_symbol))
        ]
        out = Path(config.out_dir)
        paths = [
            write_csv(out / "table2.csv", ("symbol", "red", "green", "blue", "word"), table_rows),
            write_csv(out / "table2_summary.csv", ("labeling", "union_bound_cost", "avg_bit_err_per_sym_err"), [
                ("bsa", labeling.cost, bsa_avg),
                ("random-mean", float("nan"), random_avg),
            ]),
        ]
        refs = reference.TABLE2_BITS_PER_SYMBOL_ERROR
        diff = [
            ("table2", "avg bit errors per symbol error, BSA labeling", refs["bsa"], bsa_avg,
             _rel(bsa_avg, refs["bsa"])),
            ("table2", "avg bit errors per symbol error, mean of random labelings", refs["random-mean"],
             random_avg, _rel(random_avg, refs["random-mean"])),
        ]
        return paths, diff

    def reproduce_ber_vs_osnr(self, config: RunConfig, name: str, profile: str) -> tuple[list[Path], list[tuple]]:
        spec = config.design_spec(color_fractions=COLOR_PROFILES[profile], papr_alpha=None)
        grid = config.osnr_db_grid if len(config.osnr_db_grid) > 1 else FIG_OSNR_GRID
        constellation = self.design(spec).constellation
        natural = LabelingMap.natural(spec.bits_per_symbol)
        bsa = self.label(constellation, config)

        sim = SimConfig(osnr_db_grid=grid, n_bits=config.n_bits, seed=config.seed,
                        noise_n_blue=config.noise_n_blue)
        curves = {
            "conventional": self.simulator.conventional_chain_ber(spec.color_fractions, spec.avg_power, sim),
            "designed-natural": self.simulate(constellation, natural, config, "identity", 0.0, grid, spec),
            "designed-bsa": self.simulate(constellation, bsa, config, "identity", 0.0, grid, spec),
        }
        rows = [
            (float(osnr), scheme, float(ber))
            for scheme, report in curves.items()
            for osnr, ber in zip(report.osnr_db, report.ber)
        ]
        path = write_csv(Path(config.out_dir) / f"{name}.csv", ("osnr_db", "scheme", "ber"), rows)
        return [path], []

    def reproduce_fig5(self, config: RunConfig) -> tuple[list[Path], list[tuple]]:
        base_spec = config.design_spec(color_fractions=COLOR_PROFILES["balanced"], papr_alpha=None)
        base = self.design(base_spec).constellation
        base_labeling = self.label(base, config)
        grid = (FIG5_OSNR_DB,)

        rows = []
        for eps in EPSILON_GRID:
            pre = self.svd_pre(eps)
            spec = base_spec.model_copy(update={"crosstalk_eps": eps})
            redesigned = self.design(spec, pre).constellation
            redesigned_labeling = self.label(redesigned, config)
            reports = {
                "svd-pre": self.simulate(redesigned, redesigned_labeling, config, "svd-pre", eps, grid, spec),
                "zf": self.simulate(base, base_labeling, config, "zf", eps, grid, spec),
                "lmmse": self.simulate(base, base_labeling, config, "lmmse", eps, grid, spec),
                "none": self.simulate(base, base_labeling, config, "identity", eps, grid, spec),
            }
            for scheme, report in reports.items():
                rows.append((eps, scheme, float(report.ber[0]), report.bit_errors[0], report.n_bits))
        path = write_csv(Path(config.out_dir) / "fig5.csv", ("epsilon", "scheme", "ber", "bit_errors", "n_bits"), rows)
        return [path], []

    def reproduce_fig6(self, config: RunConfig) -> tuple[list[Path], list[tuple]]:
        grid = config.osnr_db_grid if len(config.osnr_db_grid) > 1 else FIG_OSNR_GRID
        base_spec = config.design_spec(color_fractions=COLOR_PROFILES["balanced"], papr_alpha=None)
        base = self.design(base_spec).constellation
        base_labeling = self.label(base, config)
        spec = base_spec.model_copy(update={"crosstalk_eps": FIG6_EPS})
        redesigned = self.design(spec, self.svd_pre(FIG6_EPS)).constellation
        redesigned_labeling = self.label(redesigned, config)

        reports = {
            "svd-pre": self.simulate(redesigned, redesigned_labeling, config, "svd-pre", FIG6_EPS, grid, spec),
            "lmmse": self.simulate(base, base_labeling, config, "lmmse", FIG6_EPS, grid, spec),
            "zf": self.simulate(base, base_labeling, config, "zf", FIG6_EPS, grid, spec),
        }
        rows = [
            (float(osnr), scheme, float(ber))
            for scheme, report in reports.items()
            for osnr, ber in zip(report.osnr_db, report.ber)
        ]
        path = write_csv(Path(config.out_dir) / "fig6.csv", ("osnr_db", "scheme", "ber"), rows)
        return [path], []

    @staticmethod
    def _stage(name: str, fn: Callable[[], Any]) -> Any:
        """Runs one stage, tagging any failure with the stage name."""
        try:
            return fn()
        except CskError as e:
            e.detail = f"Stage '{name}' failed: {e.detail}"
            e.args = (e.detail,)
            raise
        except ValidationError as e:
            raise InvalidInputError(f"Stage '{name}' failed: {e}")
        except Exception as e:
            raise CskError(detail=f"Stage '{name}' failed: {str(e)}")
