"""
Command implementations behind cube_lab.py.

Each cmd_* returns (document, exit_code). Exit code 0 means every check the command
performs passed; failing documents carry a 'failure' record with a reproducer spec.
"""
from typing import Any, Callable, Dict, List, Optional, Tuple

import core.custom_logger as custom_logger
from core.approx import BudgetPolicy, approximate, best_dnf_oracle
from core.boolean_function import BooleanFunction
from core.dnf import Dnf, dnf_error
from core.errors import CertificationError, CubeLabError
from core.file_parsing import JsonReportParser
from core.generators import FunctionSpec
from core.influence import ISO_TOLERANCE, fourier_influence_check, report
from core.sampling import estimate
from core.shifting import ShiftSpec, compress_pipeline, shift, stage_labels, vanishes_on_lower_half
from sweeps.checks import TOLERANCE
from sweeps.sweep_framework import SweepConfig, SweepFramework

log = custom_logger.customLogger()

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3

FOURIER_TOLERANCE = 1e-10

CommandResult = Tuple[Dict[str, Any], int]


def _finish(command: str, document: Dict[str, Any], checks: Dict[str, bool],
            reproducer: Optional[str]) -> CommandResult:
    document = {'command': command, **document, 'checks': checks}
    failed = [name for name, ok in checks.items() if not ok]
    if failed:
        document['failure'] = {'failed_checks': failed, 'reproducer': reproducer}
        log.warning(f"{command}: checks {failed} failed for {reproducer}")
        return document, EXIT_CHECK_FAILED
    return document, EXIT_OK


def run_command(command: str, func: Callable[..., CommandResult], *args,
                reproducer: Optional[str] = None, **kwargs) -> CommandResult:
    """Run a cmd_* function, turning raised errors into an error document and exit code."""
    try:
        return func(*args, **kwargs)
    except CertificationError as e:
        log.error(f"{command} could not certify its result: {e}")
        return {'command': command, 'status': 'error', 'error': type(e).__name__,
                'message': str(e), 'failure': {'reproducer': reproducer}}, EXIT_CHECK_FAILED
    except CubeLabError as e:
        log.error(f"{command} failed: {e}")
        return {'command': command, 'status': 'error', 'error': type(e).__name__,
                'message': str(e), 'reproducer': reproducer}, EXIT_USAGE
    except OSError as e:
        log.error(f"{command} could not write its output: {e}")
        return {'command': command, 'status': 'error', 'error': 'OSError',
                'message': str(e), 'reproducer': reproducer}, EXIT_IO


def _function(spec_text: str) -> Tuple[FunctionSpec, BooleanFunction]:
    spec = FunctionSpec.parse(spec_text)
    return spec, spec.materialize()


def cmd_analyze(spec_text: str) -> CommandResult:
    """Influence report plus the isoperimetric, KKL and Fourier checks for one function."""
    spec, f = _function(spec_text)
    rep = report(f)
    total = float(rep.total)
    checks = {
        'iso': rep.degenerate or total >= rep.iso_bound - ISO_TOLERANCE,
        'iso_complement': rep.degenerate or total >= rep.iso_bound_complement - ISO_TOLERANCE,
        'kkl': rep.kkl_bound is None or float(rep.max_influence) >= rep.kkl_bound - TOLERANCE,
        'fourier': fourier_influence_check(f) <= FOURIER_TOLERANCE,
    }
    document = {'spec': spec.to_dict(), 'function': f.to_hex(), 'report': rep.to_dict()}
    return _finish('analyze', document, checks, f.to_hex())


def cmd_shift(spec_text: str, s_text: str = '', t_text: str = '', pipeline: bool = False) -> CommandResult:
    """Apply one shift, or the whole compression pipeline with its stage dump."""
    spec, f = _function(spec_text)
    if not pipeline:
        shift_spec = ShiftSpec.parse(s_text, t_text)
        g = shift(f, shift_spec)
        document = {
            'spec': spec.to_dict(),
            'shift': {'S': sorted(shift_spec.S), 'T': sorted(shift_spec.T), 'label': shift_spec.label()},
            'input': f.to_hex(),
            'output': g.to_hex(),
            'mu': JsonReportParser.rational_to_json(g.measure()),
        }
        return _finish('shift', document, {'measure_preserved': g.measure() == f.measure()}, f.to_hex())

    stages = compress_pipeline(f)
    labels = stage_labels(f.n)
    before = report(f)
    after = report(stages[-1])
    document = {
        'spec': spec.to_dict(),
        'input': f.to_hex(),
        'stages': [
            {'stage': k, 'shifts': list(labels[k]), 'table': g.to_hex(),
             'mu': JsonReportParser.rational_to_json(g.measure())}
            for k, g in enumerate(stages)
        ],
    }
    checks = {
        'measure_preserved': all(g.measure() == f.measure() for g in stages),
        'coordinate_influences': all(
            after.per_coord[i] <= before.per_coord[i] for i in range(1, f.n)
        ),
        'total_influence': after.total <= before.total,
        'vanishes_on_lower_half': vanishes_on_lower_half(stages[-1]),
    }
    return _finish('shift', document, checks, f.to_hex())


def cmd_approx(spec_text: str, eps: float, policy_text: Optional[str] = None) -> CommandResult:
    spec, f = _function(spec_text)
    result = approximate(f, eps, BudgetPolicy.parse(policy_text))
    independent = dnf_error(f, result.dnf)
    document = {'spec': spec.to_dict(), 'function_mu': JsonReportParser.rational_to_json(f.measure()),
                'result': result.to_dict()}
    checks = {
        'certified': result.error <= result.budget,
        'error_matches': independent == result.error,
    }
    return _finish('approx', document, checks, f.to_hex())


def cmd_oracle(spec_text: str, size: Optional[int] = None) -> CommandResult:
    spec, f = _function(spec_text)
    dnf, error = best_dnf_oracle(f, size)
    document = {
        'spec': spec.to_dict(),
        'size_cap': size,
        'dnf': dnf.to_dict(),
        'error': JsonReportParser.rational_to_json(error),
    }
    return _finish('oracle', document, {'error_matches': dnf_error(f, dnf) == error}, f.to_hex())


def cmd_sweep(config: SweepConfig) -> CommandResult:
    _, summary = SweepFramework(config).run()
    document = {'command': 'sweep', 'summary': summary, 'summary_file': config.summary_path}
    if summary['all_passed']:
        return document, EXIT_OK
    first = summary['failures'][0] if summary['failures'] else {}
    document['failure'] = {
        'failure_count': summary['failure_count'],
        'failed_checks': first.get('failed_checks', []),
        'reproducer': first.get('spec'),
    }
    return document, EXIT_CHECK_FAILED


def cmd_estimate(spec_text: str, quantity: str, samples: int, seed: int, k: Optional[int] = None,
                 dnf_text: Optional[str] = None, confidence: Optional[float] = None) -> CommandResult:
    spec = FunctionSpec.parse(spec_text)
    dnf = None if dnf_text is None else Dnf.parse(dnf_text, spec.arity)
    result = estimate(spec, quantity, samples, seed, k=k, dnf=dnf, confidence=confidence)
    return {'command': 'estimate', 'spec': spec.to_dict(), 'estimate': result.to_dict()}, EXIT_OK


def parse_checks(text: str) -> List[str]:
    return [c.strip() for c in text.split(',') if c.strip()]


def parse_grid(text: str) -> List[str]:
    """Grid specs are separated by ';' since spec parameters already use ','."""
    return [s.strip() for s in text.split(';') if s.strip()]