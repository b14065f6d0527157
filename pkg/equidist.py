#!/usr/bin/env python3
"""
Command-line front end for equidist.

Generates sequences, runs uniform-distribution tests, integration and
Monte-Carlo experiments, and writes JSON reports that embed the manifest
needed to reproduce them.

Exit status: 0 pass, 1 test failure, 2 usage or configuration error.
"""

import argparse
import json
import os
import sys
import tempfile
from typing import Any, Dict, List, Optional, Tuple

import config
from errors import EquidistError, InputError
from experiments import ExperimentConfig, run_experiment
from integrands import parse_integrand
from integrate import qmc_integrate, tagged_integrate
from logging_utils import get_logger, resolve_log_options, setup_logging
from partition import PartitionConfig
from report_utils import (
  RunManifest, atomic_write_json, attach_manifest, load_json, manifest_of,
  rows_identical, write_csv_rows
)
from sequences import (
  AnySequence, TaggedSequence, diagonal_spoiler, iid_uniform, kronecker,
  lift_to_tag, sample_tagged, sequence_document, sequence_from_document, van_der_corput
)
from ud_tests import (
  default_schedule, discrepancy_report, parse_grid,
  separation_check, tagged_weyl_check, ud_verdict, weyl_bracket_check
)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

# Arguments that never enter a manifest (outputs and logging)
NON_CONFIG_ARGS = ("out", "csv", "log_level", "log_to_stdout", "verbose", "func")
OUTPUT_FLAGS = ("--out", "--csv")

DEFAULT_WEYL_INTEGRANDS = ["1", "x", "x2", "sin:1", "cos:1"]
DEFAULT_INTEGRANDS = ["x2"]


def parse_schedule(text: Optional[str]) -> Optional[List[int]]:
  if text is None:
    return None
  try:
    return [int(part) for part in text.split(",") if part.strip()]
  except ValueError as e:
    raise InputError(f"Malformed schedule '{text}': {e}") from e


def strip_output_args(argv: List[str]) -> List[str]:
  """argv without --out/--csv and their values, for the manifest."""
  kept = []
  skip = False
  for arg in argv:
    if skip:
      skip = False
      continue
    if arg in OUTPUT_FLAGS:
      skip = True
      continue
    if any(arg.startswith(flag + "=") for flag in OUTPUT_FLAGS):
      continue
    kept.append(arg)
  return kept


def load_sequence(path: str) -> AnySequence:
  return sequence_from_document(load_json(path))


def partition_for(seq: AnySequence, m: Optional[int]) -> PartitionConfig:
  """The sequence's own partition, or m at the sequence precision."""
  if m is None and isinstance(seq, TaggedSequence):
    return seq.cfg
  return PartitionConfig(m if m is not None else config.DEFAULT_M, seq.precision)


# Subcommand handlers: each returns (document, passed)

def cmd_generate(args) -> Tuple[Dict[str, Any], bool]:
  if args.kind == "kronecker":
    seq = kronecker(args.alpha, args.n, args.p)
  elif args.kind == "van_der_corput":
    seq = van_der_corput(args.base, args.n, args.p)
  elif args.kind == "iid_uniform":
    seq = iid_uniform(args.seed, args.n, args.p)
  else:
    seq = sample_tagged(args.seed, args.tag, args.n, PartitionConfig(args.m, args.p))
  return sequence_document(seq), True


def cmd_lift(args) -> Tuple[Dict[str, Any], bool]:
  seq = load_sequence(args.seq)
  base = seq.base if isinstance(seq, TaggedSequence) else seq
  p = args.p if args.p is not None else base.precision
  lifted = lift_to_tag(base, args.tag, PartitionConfig(args.m, p))
  return sequence_document(lifted), True


def cmd_spoil(args) -> Tuple[Dict[str, Any], bool]:
  seq = load_sequence(args.seq)
  base = seq.base if isinstance(seq, TaggedSequence) else seq
  p = args.p if args.p is not None else base.precision
  m = args.m if args.m is not None else max(2, len(base))
  spoiled = diagonal_spoiler(base, PartitionConfig(m, p))
  return sequence_document(spoiled), True


def cmd_test(args) -> Tuple[Dict[str, Any], bool]:
  seq = load_sequence(args.seq)
  grid = parse_grid(args.grid)
  schedule = parse_schedule(args.schedule) or default_schedule(len(seq))
  needs_partition = args.tag is not None or args.separate is not None
  cfg = partition_for(seq, args.m) if needs_partition else None

  if args.separate is not None:
    try:
      i, j = (int(t) for t in args.separate.split(","))
    except ValueError as e:
      raise InputError(f"--separate expects two tags 'i,j', got '{args.separate}'") from e
    rows = separation_check(seq, i, j, grid, schedule, cfg)
    passed = all(row.holds for row in rows)
    document = {
      "kind": "separation",
      "config": {"tags": [i, j], "schedule": schedule, "partition": cfg.to_dict()},
      "rows": [row.to_dict() for row in rows],
      "pass": passed,
    }
    return document, passed

  verdict = ud_verdict(seq, grid, schedule, args.tol, args.tag, cfg)
  return verdict.to_dict(), verdict.passed


def cmd_discrepancy(args) -> Tuple[Dict[str, Any], bool]:
  seq = load_sequence(args.seq)
  schedule = parse_schedule(args.schedule) or default_schedule(len(seq))
  return discrepancy_report(seq, schedule).to_dict(), True


def cmd_weyl(args) -> Tuple[Dict[str, Any], bool]:
  seq = load_sequence(args.seq)
  cfg = partition_for(seq, args.m)
  integrands = [parse_integrand(text) for text in (args.integrand or DEFAULT_WEYL_INTEGRANDS)]
  n = args.n if args.n is not None else len(seq)
  report = tagged_weyl_check(seq, args.tag, integrands, n, args.tol, cfg)
  document = report.to_dict()
  passed = report.passed

  if args.brackets is not None:
    schedule = default_schedule(n)
    brackets = []
    for h in integrands:
      if h.lipschitz_bound() is None:
        continue
      for row in weyl_bracket_check(seq, args.tag, h, args.brackets, schedule, cfg):
        brackets.append({"integrand": h.label, **row.to_dict()})
    document["brackets"] = brackets
    passed = passed and all(row["ordered"] for row in brackets)
    document["pass"] = passed

  return document, passed


def cmd_integrate(args) -> Tuple[Dict[str, Any], bool]:
  seq = load_sequence(args.seq)
  n = args.n if args.n is not None else len(seq)
  integrands = [parse_integrand(text) for text in (args.integrand or DEFAULT_INTEGRANDS)]
  estimates = []
  for f in integrands:
    if f.tag is None:
      estimates.append(qmc_integrate(f, seq, n))
    else:
      estimates.append(tagged_integrate(f, seq, n, partition_for(seq, args.m)))
  passed = args.tol is None or all(abs(e.deviation) <= args.tol for e in estimates)
  document = {
    "kind": "integrate",
    "config": {"N": n, "tolerance": args.tol},
    "rows": [e.to_dict() for e in estimates],
    "pass": passed,
  }
  return document, passed


def experiment_config_from_args(args) -> ExperimentConfig:
  """JSON config file (if any) overlaid with the flags given explicitly."""
  data: Dict[str, Any] = load_json(args.config) if args.config else {}
  data["experiment"] = args.experiment
  overrides = {
    "trials": args.trials,
    "n": args.n,
    "eps": args.eps,
    "tag": args.tag,
    "master_seed": args.seed,
    "delta": args.delta,
    "grid": args.grid,
    "integrand": args.integrand,
  }
  data.update({key: value for key, value in overrides.items() if value is not None})
  if args.m is not None or args.p is not None:
    partition = dict(data.get("partition") or {"m": config.DEFAULT_M, "p": config.DEFAULT_P})
    if args.m is not None:
      partition["m"] = args.m
    if args.p is not None:
      partition["p"] = args.p
    data["partition"] = partition
  return ExperimentConfig.from_dict(data)


def cmd_experiment(args) -> Tuple[Dict[str, Any], bool]:
  report = run_experiment(experiment_config_from_args(args))
  return report.to_dict(), report.succeeded


def cmd_replay(args) -> Tuple[Dict[str, Any], bool]:
  original = load_json(args.report)
  manifest = manifest_of(original)
  if manifest is None:
    raise InputError(f"{args.report} carries no manifest")
  with tempfile.TemporaryDirectory() as tmp_dir:
    regenerated_path = os.path.join(tmp_dir, "replay.json")
    code = run(list(manifest.argv) + ["--out", regenerated_path])
    if code == EXIT_USAGE or not os.path.exists(regenerated_path):
      raise InputError(f"replaying {manifest.argv} failed with exit status {code}")
    regenerated = load_json(regenerated_path)
  identical = rows_identical(original, regenerated)
  document = {
    "kind": "replay",
    "config": {"report": args.report, "replayed": manifest.to_dict()},
    "rows": [{"subcommand": manifest.subcommand, "identical": identical}],
    "pass": identical,
  }
  return document, identical


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
  parser.add_argument('--out', help='Write the JSON report here (default: stdout)')
  parser.add_argument('--csv', help='Also write the report rows as CSV')
  parser.add_argument(
    '--log-level',
    choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
    default=None,
    help='Set logging level (default: WARNING from config)'
  )
  parser.add_argument(
    '--log-to-stdout',
    action='store_true',
    help='Also log to the console (default: log to file only)'
  )
  parser.add_argument(
    '--verbose',
    action='store_true',
    help='Enable DEBUG level logging (shorthand for --log-level DEBUG)'
  )


def add_partition_arguments(parser: argparse.ArgumentParser, m_default=None, p_default=None) -> None:
  parser.add_argument('--m', type=int, default=m_default, help='Number of tag classes')
  parser.add_argument('--p', type=int, default=p_default, help='Grid precision in bits')


def build_parser() -> argparse.ArgumentParser:
  parser = argparse.ArgumentParser(
    prog="equidist",
    description="Uniform distribution on [0,1] with tagged measures: sequences, tests, integration, experiments",
    formatter_class=argparse.RawDescriptionHelpFormatter,
    epilog="""
Examples:
  # Kronecker sequence of sqrt(2), 1000 terms at 32 bits
  %(prog)s generate --kind kronecker --alpha sqrt2 --n 1000 --p 32 --out seq.json

  # u.d. verdict over the dyadic-8 grid
  %(prog)s test --seq seq.json --grid dyadic8 --schedule 100,1000 --tol 0.02

  # Lift onto tag 3 of 8 and run the tagged verdict
  %(prog)s lift --seq seq.json --tag 3 --m 8 --out lifted.json
  %(prog)s test --seq lifted.json --tag 3 --tol 0.02

  # Hlawka-type experiment
  %(prog)s experiment hlawka --m 4 --p 32 --tag 0 --trials 200 --n 10000 --eps 0.02 --seed 42

  # Re-run a report from its manifest
  %(prog)s replay --report report.json

Exit status: 0 pass, 1 test failure, 2 usage or configuration error.
    """
  )
  subparsers = parser.add_subparsers(dest="subcommand", required=True)

  generate = subparsers.add_parser('generate', help='Generate a sequence prefix')
  generate.add_argument(
    '--kind',
    choices=['kronecker', 'van_der_corput', 'iid_uniform', 'sampled'],
    default='kronecker'
  )
  generate.add_argument('--alpha', default='sqrt2', help='Named constant or rational literal')
  generate.add_argument('--base', type=int, default=2, help='van der Corput base')
  generate.add_argument('--seed', type=int, default=config.DEFAULT_MASTER_SEED)
  generate.add_argument('--tag', type=int, default=0, help='Tag for --kind sampled')
  generate.add_argument('--n', type=int, required=True, help='Number of terms')
  add_partition_arguments(generate, config.DEFAULT_M, config.DEFAULT_P)
  generate.set_defaults(func=cmd_generate)

  lift = subparsers.add_parser('lift', help='Lift a sequence into tag class t')
  lift.add_argument('--seq', required=True)
  lift.add_argument('--tag', type=int, required=True)
  add_partition_arguments(lift, config.DEFAULT_M)
  lift.set_defaults(func=cmd_lift)

  spoil = subparsers.add_parser('spoil', help='Spread a sequence over distinct tags')
  spoil.add_argument('--seq', required=True)
  add_partition_arguments(spoil)
  spoil.set_defaults(func=cmd_spoil)

  test = subparsers.add_parser('test', help='Counting ratios and u.d. verdict')
  test.add_argument('--seq', required=True)
  test.add_argument('--grid', default=config.DEFAULT_GRID)
  test.add_argument('--schedule', help='Comma-separated increasing N values')
  test.add_argument('--tol', type=float, default=config.DEFAULT_TOLERANCE)
  test.add_argument('--tag', type=int, help='Count only terms in C_t')
  test.add_argument('--separate', help='Check tagged ratios of tags "i,j" against the plain ratio')
  test.add_argument('--m', type=int, help='Number of tag classes (untagged inputs)')
  test.set_defaults(func=cmd_test)

  discrepancy = subparsers.add_parser('discrepancy', help='Star and L2-star discrepancy')
  discrepancy.add_argument('--seq', required=True)
  discrepancy.add_argument('--schedule')
  discrepancy.set_defaults(func=cmd_discrepancy)

  weyl = subparsers.add_parser('weyl', help='Tagged Weyl-criterion check')
  weyl.add_argument('--seq', required=True)
  weyl.add_argument('--tag', type=int, required=True)
  weyl.add_argument('--integrand', action='append', help='Integrand (repeatable)')
  weyl.add_argument('--n', type=int)
  weyl.add_argument('--tol', type=float, default=config.DEFAULT_TOLERANCE)
  weyl.add_argument('--brackets', type=int, metavar='PIECES', help='Also check step brackets')
  weyl.add_argument('--m', type=int)
  weyl.set_defaults(func=cmd_weyl)

  integrate = subparsers.add_parser('integrate', help='Quasi-Monte-Carlo integration')
  integrate.add_argument('--seq', required=True)
  integrate.add_argument('--integrand', action='append', help='Integrand; "@t" suffix for tagged')
  integrate.add_argument('--n', type=int)
  integrate.add_argument('--tol', type=float)
  integrate.add_argument('--m', type=int)
  integrate.set_defaults(func=cmd_integrate)

  experiment = subparsers.add_parser('experiment', help='Seeded Monte-Carlo experiments')
  experiment.add_argument('experiment', choices=['slln', 'hlawka'])
  experiment.add_argument('--config', help='JSON experiment config; flags override it')
  experiment.add_argument('--trials', type=int)
  experiment.add_argument('--n', type=int)
  experiment.add_argument('--eps', type=float)
  experiment.add_argument('--tag', type=int)
  experiment.add_argument('--seed', type=int, help='Master seed')
  experiment.add_argument('--delta', type=float)
  experiment.add_argument('--grid', help='hlawka: interval grid')
  experiment.add_argument('--integrand', help='slln: integrand')
  add_partition_arguments(experiment)
  experiment.set_defaults(func=cmd_experiment)

  replay = subparsers.add_parser('replay', help='Re-run a report from its manifest')
  replay.add_argument('--report', required=True)
  replay.set_defaults(func=cmd_replay)

  for subparser in subparsers.choices.values():
    add_common_arguments(subparser)

  return parser


def configure_logging(args) -> None:
  log_level, log_to_stdout = resolve_log_options(
    args.verbose, args.log_level, args.log_to_stdout, config.LOG_LEVEL
  )
  setup_logging(config.LOG_DIR, log_level, log_to_stdout=log_to_stdout)


def emit(document: Dict[str, Any], args) -> None:
  if args.out:
    atomic_write_json(args.out, document)
  else:
    print(json.dumps(document, indent=2))
  if args.csv:
    write_csv_rows(args.csv, document.get("rows", []))


def run(argv: List[str]) -> int:
  """
  Run one subcommand.

  Args:
    argv: Arguments without the program name

  Returns:
    Exit status: 0 pass, 1 test failure, 2 usage or configuration error
  """
  parser = build_parser()
  try:
    args = parser.parse_args(argv)
  except SystemExit as e:
    return e.code if isinstance(e.code, int) else EXIT_USAGE

  configure_logging(args)
  logger = get_logger("Main")
  logger.debug(f"equidist starting with arguments: {vars(args)}")

  try:
    document, passed = args.func(args)
    manifest = RunManifest(
      subcommand=args.subcommand,
      argv=strip_output_args(argv),
      config={
        key: value for key, value in vars(args).items()
        if key not in NON_CONFIG_ARGS and value is not None
      },
      outputs={key: getattr(args, key) for key in ("out", "csv") if getattr(args, key)},
    )
    emit(attach_manifest(document, manifest), args)
  except (EquidistError, OSError) as e:
    logger.error(f"{args.subcommand} failed: {e}")
    print(f"ERROR: {e}", file=sys.stderr)
    return EXIT_USAGE

  if not passed:
    logger.warning(f"{args.subcommand}: test failed")
    return EXIT_FAIL
  return EXIT_PASS


def main():
  """Main entry point."""
  sys.exit(run(sys.argv[1:]))


if __name__ == '__main__':
  main()
