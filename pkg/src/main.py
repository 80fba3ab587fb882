#!/usr/bin/env python3
"""
gridrisk command-line entry point

Commands: synth, lags, rho, train, backtest, report, compare
"""
import argparse
import dataclasses
import glob
import json
import logging
import os
import sys
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd

from src import __version__
from src.backtest.runner import BacktestResult, run_backtest, run_fixed_split
from src.backtest.schedule import make_schedule
from src.data.align import AlignedFrame, align
from src.data.forecast_set import QuantileForecastSet
from src.data.series import HOUR, ChannelKind, HourlySeries
from src.features.builder import FeatureBuilder
from src.features.lags import LagProfile, scan_profile
from src.forecast.forecaster import ForecasterFactory
from src.ingest.parser import ingest_csv
from src.metrics.significance import dm_test
from src.objectives.config import ObjectiveConfig
from src.policy.asymmetry import estimate_asymmetry
from src.report.writer import ReportRow, build_report_row, emit_report
from src.synth.generator import PROFILES, SynthSettings, generate
from src.utils.config_utils import ExperimentConfig, load_config
from src.utils.errors import ConfigError, DataError, GridRiskError
from src.utils.file_utils import ensure_dir, require_file, write_csv, write_json
from src.utils.logging_utils import setup_logging

logger = logging.getLogger(__name__)

DEFAULT_CONFIG = 'config/config.yaml'
FORECAST_PREFIX = 'forecasts_'


class ArgumentParser(argparse.ArgumentParser):
    """
    argparse parser whose usage errors become ConfigError, so they reach stderr as JSON
    """

    def error(self, message: str):
        raise ConfigError(f"{self.prog}: {message}", {"usage": self.format_usage().strip()})


def parse_arguments(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """Parse command line arguments"""
    parser = ArgumentParser(prog='gridrisk',
                            description='Forecast-reliability toolkit for grid load forecasting')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    sub = parser.add_subparsers(dest='command', required=True)

    common = ArgumentParser(add_help=False)
    common.add_argument('--config', type=str, help=f'Experiment config (default: {DEFAULT_CONFIG} when present)')
    common.add_argument('--out-dir', type=str, help='Output directory (overrides report.out_dir)')
    common.add_argument('--seed', type=int, help='Random seed (overrides config seed)')
    common.add_argument('--verbose', action='store_true', help='Enable debug logging')

    synth = sub.add_parser('synth', parents=[common], help='Write a deterministic synthetic dataset')
    synth.add_argument('--days', type=int, default=400, help='Dataset length in days')
    synth.add_argument('--profile', choices=list(PROFILES), default='duck', help='Load shape')
    synth.add_argument('--start', type=str, default='2024-01-01T00:00:00Z', help='First hour (UTC)')

    lags = sub.add_parser('lags', parents=[common], help='Scan weather-to-load lags')
    lags.add_argument('--weather', type=str, help='Weather CSV (overrides data.weather)')
    lags.add_argument('--load', type=str, help='Load CSV (overrides data.load)')
    lags.add_argument('--max-lag', type=int, help='Largest lag in hours (overrides features.max_lag)')

    rho = sub.add_parser('rho', parents=[common], help='Estimate the cost asymmetry from DA/RT prices')
    rho.add_argument('--lmp-da', type=str, help='OASIS day-ahead LMP export (overrides data.lmp_da)')
    rho.add_argument('--lmp-rt', type=str, help='OASIS real-time LMP export (overrides data.lmp_rt)')
    rho.add_argument('--sld-fcst', type=str, help='OASIS SLD_FCST export for the event-conditioned ratio')
    rho.add_argument('--node', type=str, help='Pricing node (default: the only node in the files)')
    rho.add_argument('--area', type=str, help='TAC area in the SLD_FCST export')
    rho.add_argument('--kappa', type=float, default=1.0, help='Reliability premium (>= 1)')
    rho.add_argument('--min-event-hours', type=int, default=100, help='Events needed per side for rho_event')

    for name, description in (('train', 'Fit models on the fixed 70/10/20 split'),
                              ('backtest', 'Walk-forward backtest of the configured models')):
        command = sub.add_parser(name, parents=[common], help=description)
        command.add_argument('--model', action='append', help='Model to run (repeatable; default: config)')
        command.add_argument('--h-star', type=int, help='Target lead hour (overrides objective.h_star)')
        command.add_argument('--n-jobs', type=int, help='Folds fitted concurrently')

    report = sub.add_parser('report', parents=[common], help='Re-score forecast CSVs into report files')
    report.add_argument('--forecasts', nargs='+', required=True, help='forecasts_<model>_<variant>.csv files')
    report.add_argument('--mode', choices=['walkforward', 'fixed_split'], default='walkforward')
    report.add_argument('--h-star', type=int, help='Target lead hour (overrides objective.h_star)')
    report.add_argument('--format', action='append', dest='formats', help='Report format (repeatable)')

    compare = sub.add_parser('compare', parents=[common], help='Diebold-Mariano test between two forecast CSVs')
    compare.add_argument('--a', required=True, help='Forecast CSV of model A')
    compare.add_argument('--b', required=True, help='Forecast CSV of model B')
    compare.add_argument('--h', type=int, default=24, help='Horizon for the HAC bandwidth')
    compare.add_argument('--lead', type=int, help='Restrict to one lead hour')

    try:
        return parser.parse_args(argv)
    except ConfigError as e:
        raise ConfigError(e.message, dict(e.context, argv=list(sys.argv[1:] if argv is None else argv))) from None


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """
    Load the config and apply command line overrides
    """
    if args.config:
        config = load_config(args.config)
    elif os.path.isfile(DEFAULT_CONFIG):
        config = load_config(DEFAULT_CONFIG)
    else:
        logger.debug("No config file; using built-in defaults")
        config = ExperimentConfig()

    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    if args.out_dir:
        config = dataclasses.replace(config, report=dataclasses.replace(config.report, out_dir=args.out_dir))
    h_star = getattr(args, 'h_star', None)
    if h_star is not None:
        config = dataclasses.replace(config, objective=dataclasses.replace(config.objective, h_star=h_star))
    n_jobs = getattr(args, 'n_jobs', None)
    if n_jobs is not None:
        config = dataclasses.replace(config, schedule=dataclasses.replace(config.schedule, n_jobs=n_jobs))
    return config


def stamp(config: ExperimentConfig, payload: Dict) -> Dict:
    return dict(payload, tool_version=__version__, config_hash=config.config_hash())


def _data_path(override: Optional[str], configured: Optional[str], role: str) -> str:
    path = override or configured
    if not path:
        raise ConfigError(f"No {role} file given (config data.{role} or command flag)", {"role": role})
    return require_file(path)


def _area_of(series_id: str) -> str:
    return series_id.split(":", 1)[0]


def read_inputs(config: ExperimentConfig, load_path: Optional[str] = None,
                weather_path: Optional[str] = None) -> Tuple[HourlySeries, List[HourlySeries]]:
    """
    Parse the load and weather files and select one area

    Returns:
        tuple: (load series, weather series of the configured kinds)
    """
    loads = ingest_csv(_data_path(load_path, config.data.load, 'load'), 'load')
    area = config.data.area or _area_of(loads[0].id)
    load = next((s for s in loads if _area_of(s.id) == area), None)
    if load is None:
        raise DataError(f"No load series for area {area}", {"area": area, "series": [s.id for s in loads]})

    kinds = set(config.features.settings.weather)
    weather = [s for s in ingest_csv(_data_path(weather_path, config.data.weather, 'weather'), 'weather')
               if _area_of(s.id) == area and s.channel_kind.value in kinds]
    if not weather:
        raise DataError(f"No configured weather channels for area {area}", {"area": area, "kinds": sorted(kinds)})
    logger.info(f"Area {area}: load {load.span.describe()}, weather {sorted(s.channel_kind.value for s in weather)}")
    return load, weather


def _head(series: HourlySeries, last) -> HourlySeries:
    data = series.to_series()
    return HourlySeries.from_pandas(series.id, series.channel_kind, data[data.index <= last])


def lag_profile(config: ExperimentConfig, load: HourlySeries, weather: List[HourlySeries],
                frame: AlignedFrame) -> LagProfile:
    """
    Fixed lags from the config, scanned lags for the rest

    Scans only use the initial training window so later folds' data never
    chooses the lags.
    """
    fixed = dict(config.features.lags)
    entries = dict(LagProfile.fixed(fixed).entries)
    pending = [s for s in weather if s.channel_kind.value not in fixed]
    if pending and config.features.scan_lags:
        last = frame.timestamps[0] + pd.Timedelta(days=config.schedule.initial_train_days) - HOUR
        scanned = scan_profile([_head(s, last) for s in pending], _head(load, last),
                               config.features.settings.max_lag)
        entries.update(scanned.entries)
    return LagProfile(entries)


def prepare(config: ExperimentConfig) -> Tuple[AlignedFrame, FeatureBuilder]:
    settings = config.features.settings
    if settings.horizon_hours != config.schedule.horizon_hours:
        raise ConfigError("features.horizon_hours and schedule.horizon_hours must agree",
                          {"features": settings.horizon_hours, "schedule": config.schedule.horizon_hours})
    load, weather = read_inputs(config)
    frame = align([load] + weather, config.data.gap_policy)
    profile = lag_profile(config, load, weather, frame)
    builder = FeatureBuilder.for_frame(frame, settings, profile, config.require_seed(), load_column=load.id)
    return frame, builder


def variants(config: ExperimentConfig, model: str) -> Dict[str, ObjectiveConfig]:
    """
    Objective per variant name; the seasonal baseline has no objective to vary
    """
    configured = config.forecaster.variants
    if model == 'seasonal_naive' or not configured:
        return {'default': config.objective}
    base = config.objective.to_dict()
    out = {}
    for name, overrides in configured.items():
        try:
            out[name] = ObjectiveConfig.from_dict(dict(base, **overrides))
        except GridRiskError as e:
            raise ConfigError(f"forecaster.variants.{name}: {e.message}", dict(e.context, variant=name)) from e
    return out


def run_models(config: ExperimentConfig, models: Optional[List[str]], mode: str) -> List[ReportRow]:
    """
    Fit and score every (model, variant) pair in one mode
    """
    seed = config.require_seed()
    frame, builder = prepare(config)
    out_dir = config.report.out_dir
    ensure_dir(out_dir)
    config_hash = config.config_hash()
    settings = config.report.settings(config.objective.h_star)
    factory = ForecasterFactory()
    rows = []

    for model in models or list(config.forecaster.models):
        for variant, objective in variants(config, model).items():
            logger.info(f"Running {model}/{variant} ({mode})")

            def make_forecaster(model=model, objective=objective):
                return factory.get_forecaster(model, objective, config.forecaster.hyperparameters(), seed)

            if mode == 'fixed_split':
                result = run_fixed_split(frame, builder, make_forecaster, config.schedule)
            else:
                result = run_backtest(frame, make_schedule(frame.span, config.schedule), builder, make_forecaster)

            rows.append(build_report_row(result.forecasts, model, variant, mode, settings,
                                         result.schedule.schedule_hash()))
            suffix = model if variant == 'default' else f"{model}_{variant}"
            write_csv(os.path.join(out_dir, f"{FORECAST_PREFIX}{model}_{variant}.csv"), result.forecasts.to_frame())
            if mode == 'fixed_split':
                _save_checkpoint(result, os.path.join(out_dir, f"model_{suffix}.json"), config_hash)
            else:
                write_json(os.path.join(out_dir, f"folds_{model}_{variant}.json"),
                           stamp(config, {"schedule": result.schedule.to_dict(),
                                          "folds": result.fold_summaries()}))
    return rows


def _save_checkpoint(result: BacktestResult, path: str, config_hash: str) -> None:
    fitted = next(f for f in result.folds if f.checkpoint)
    checkpoint = dict(fitted.checkpoint, config_hash=config_hash, tool_version=__version__)
    write_json(path, checkpoint)
    logger.info(f"Saved {checkpoint['model']} checkpoint to {path}")


def split_forecast_name(path: str) -> Tuple[str, str]:
    """
    (model, variant) from a forecasts_<model>_<variant>.csv file name
    """
    stem = os.path.splitext(os.path.basename(path))[0]
    if stem.startswith(FORECAST_PREFIX):
        stem = stem[len(FORECAST_PREFIX):]
    for model in sorted(ForecasterFactory.names, key=len, reverse=True):
        if stem.startswith(f"{model}_"):
            return model, stem[len(model) + 1:]
    return stem, 'default'


def read_forecasts(path: str) -> QuantileForecastSet:
    frame = pd.read_csv(require_file(path))
    if not {'issue_time', 'lead', 'actual'} <= set(frame.columns):
        raise DataError(f"{path} is not a forecast table", {"path": path, "columns": list(frame.columns)})
    return QuantileForecastSet.from_frame(frame)


def cmd_synth(args: argparse.Namespace, config: ExperimentConfig) -> int:
    seed = args.seed if args.seed is not None else (config.seed or 0)
    dataset = generate(SynthSettings(seed=seed, days=args.days, profile=args.profile, start=args.start))
    paths = dataset.write(args.out_dir or config.report.out_dir)
    for role, path in sorted(paths.items()):
        logger.info(f"{role}: {path}")
    return 0


def cmd_lags(args: argparse.Namespace, config: ExperimentConfig) -> int:
    load, weather = read_inputs(config, args.load, args.weather)
    max_lag = args.max_lag if args.max_lag is not None else config.features.settings.max_lag
    profile = scan_profile(weather, load, max_lag)
    path = write_json(os.path.join(config.report.out_dir, 'lags.json'),
                      stamp(config, {"load": load.id, "max_lag": max_lag, "lags": profile.to_dict()}))
    logger.info(f"Wrote lag profile to {path}")
    return 0


def _pick(series: List[HourlySeries], suffix: str, key: Optional[str], role: str) -> HourlySeries:
    matches = [s for s in series if s.id.endswith(suffix) and (key is None or _area_of(s.id) == key)]
    if len(matches) != 1:
        raise DataError(f"Expected one {role} series, found {len(matches)}",
                        {"role": role, "key": key, "series": [s.id for s in series]})
    return matches[0]


def cmd_rho(args: argparse.Namespace, config: ExperimentConfig) -> int:
    da_all = ingest_csv(_data_path(args.lmp_da, config.data.lmp_da, 'lmp_da'), 'lmp_oasis')
    rt_all = ingest_csv(_data_path(args.lmp_rt, config.data.lmp_rt, 'lmp_rt'), 'lmp_oasis')
    lmp_da = _pick(da_all, f":{ChannelKind.LMP_DA.value}", args.node, 'day-ahead LMP')
    node = _area_of(lmp_da.id)
    lmp_rt = _pick(rt_all, f":{ChannelKind.LMP_RT.value}", node, 'real-time LMP')

    actual_load = da_forecast = None
    sld_path = args.sld_fcst or config.data.sld_fcst
    if sld_path:
        loads = ingest_csv(require_file(sld_path), 'lmp_oasis')
        area = args.area or config.data.area
        actual_load = _pick(loads, ":load_actual", area, 'actual load')
        da_forecast = _pick(loads, ":load_dam", _area_of(actual_load.id), 'day-ahead load forecast')

    estimate = estimate_asymmetry(node, lmp_da, lmp_rt, args.kappa, actual_load, da_forecast,
                                  args.min_event_hours)
    path = write_json(os.path.join(config.report.out_dir, f"rho_{node}.json"), stamp(config, estimate.to_dict()))
    logger.info(f"Wrote asymmetry estimate to {path}")
    return 0


def cmd_train(args: argparse.Namespace, config: ExperimentConfig) -> int:
    rows = run_models(config, args.model, 'fixed_split')
    _emit(config, rows)
    return 0


def cmd_backtest(args: argparse.Namespace, config: ExperimentConfig) -> int:
    rows = run_models(config, args.model, 'walkforward')
    _emit(config, rows)
    return 0


def cmd_report(args: argparse.Namespace, config: ExperimentConfig) -> int:
    settings = config.report.settings(config.objective.h_star)
    paths = sorted({p for pattern in args.forecasts for p in (glob.glob(pattern) or [pattern])})
    rows = []
    for path in paths:
        model, variant = split_forecast_name(path)
        rows.append(build_report_row(read_forecasts(path), model, variant, args.mode, settings))
    _emit(config, rows, args.formats)
    return 0


def cmd_compare(args: argparse.Namespace, config: ExperimentConfig) -> int:
    a = read_forecasts(args.a)
    b = read_forecasts(args.b)
    leads = None if args.lead is None else [args.lead]
    errors = []
    for fs in (a, b):
        actual, point = fs.scored(leads)
        keys = pd.MultiIndex.from_product([fs.issue_times, leads or fs.lead_hours.tolist()],
                                          names=['issue_time', 'lead'])
        errors.append(pd.Series(actual - point, index=keys))
    joined = pd.concat(errors, axis=1, join='inner', keys=['a', 'b'])
    if joined.empty:
        raise DataError("Forecast files share no (issue time, lead) points", {"a": args.a, "b": args.b})
    result = dm_test(joined['a'].to_numpy(), joined['b'].to_numpy(), args.h)
    payload = stamp(config, dict(result.to_dict(), a=os.path.basename(args.a), b=os.path.basename(args.b),
                                 lead=args.lead))
    path = write_json(os.path.join(config.report.out_dir, 'compare.json'), payload)
    logger.info(f"DM statistic {result.statistic:.4f}, p={result.p_value:.4g} (n={result.n_obs}); wrote {path}")
    return 0


def _emit(config: ExperimentConfig, rows: List[ReportRow], formats: Optional[List[str]] = None) -> None:
    template_dir = config.report.template_dir
    if template_dir and not os.path.isdir(template_dir):
        logger.debug(f"Template directory {template_dir} not found; using built-in templates")
        template_dir = None
    for path in emit_report(rows, config.report.out_dir, formats or config.report.formats,
                            config.config_hash(), template_dir):
        logger.info(f"Wrote {path}")


COMMANDS = {
    'synth': cmd_synth,
    'lags': cmd_lags,
    'rho': cmd_rho,
    'train': cmd_train,
    'backtest': cmd_backtest,
    'report': cmd_report,
    'compare': cmd_compare,
}


def _fail(payload: Dict, exit_code: int) -> int:
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return exit_code


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main execution function"""
    try:
        args = parse_arguments(argv)
    except ConfigError as e:
        return _fail(e.to_payload(), e.exit_code)
    setup_logging(logging.DEBUG if args.verbose else logging.INFO)

    try:
        config = resolve_config(args)
        if not args.verbose:
            setup_logging(getattr(logging, config.logging.level.upper(), logging.INFO), config.logging.file)
        elif config.logging.file:
            setup_logging(logging.DEBUG, config.logging.file)
        logger.debug(f"gridrisk {__version__} {args.command} (config hash {config.config_hash()})")
        return COMMANDS[args.command](args, config)
    except GridRiskError as e:
        logger.debug(f"{args.command} failed", exc_info=True)
        logger.error(f"{e.code}: {e.message}")
        return _fail(e.to_payload(), e.exit_code)
    except Exception as e:
        logger.debug(f"{args.command} failed", exc_info=True)
        logger.error(f"Unexpected error: {e}")
        return _fail({"code": "InternalError", "message": str(e), "context": {}}, 1)


if __name__ == "__main__":
    sys.exit(main())
