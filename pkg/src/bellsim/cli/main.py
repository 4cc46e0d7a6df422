"""
bellsim 명령줄 도구

    bellsim chsh --behavior inputs/tsirelson.json
    bellsim is-local --behavior inputs/prbox.json
    bellsim rel-ent --behavior inputs/prbox.json --restarts 4 --seed 7
    bellsim min-ext --state inputs/phi_plus.json --settings 2 --filter
    bellsim witness build --normalization corrected
    bellsim process classify --process proc.json
    bellsim demo filtering

종료 코드: 0 성공, 2 입력 검증 실패, 3 solver 수렴 실패 (결과는 출력), 64 잘못된 플래그, 65 JSON 문법 오류
"""
import argparse
import sys
from typing import Dict, List, Optional

import numpy as np

from bellsim.core import SimConfig, ValidationError, SolverError, echo
from bellsim.analysis.locality import (
    is_local, chsh_value, behavior_from_state, horodecki_chsh, chsh_angle_search, demo_hidden_nonlocality,
    CHSH_SCENARIO, Scenario,
)
from bellsim.analysis.measures import MeasureResult, rel_entropy_nonlocality, minimal_extension_state, process_nonlocality
from bellsim.analysis.witness import (
    build_chsh_povm_witness, evaluate_witness, witness_choi_contraction, losr_min_witness_value, choi_separability,
)
from bellsim.process.model import check_realizable
from bellsim.process.superprocess import apply_superprocess
from bellsim.process.classify import classify
from bellsim.database import db_manager, record_run
from . import codec

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NOT_CONVERGED = 3
EXIT_USAGE = 64
EXIT_DATA = 65

NORMALIZATION_FLAGS = {"paper": "paper_3_16", "corrected": "corrected_3_16_delta_quarter"}


class UsageError(Exception):
    pass


class CliParser(argparse.ArgumentParser):
    """argparse 기본 동작(exit 2)을 막고 UsageError 로 돌린다"""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ----------------------------------------------------------------------
# 결과 직렬화
# ----------------------------------------------------------------------

def measure_document(result: MeasureResult) -> dict:
    details = {}
    for key, value in result.details.items():
        if key == "behavior":
            details[key] = codec.encode_behavior(value)
        else:
            details[key] = value
    return {
        "value": result.value,
        "gap": result.gap,
        "iterations": result.iterations,
        "converged": result.converged,
        "argmin_weights": None if result.argmin_weights is None else np.asarray(result.argmin_weights),
        "details": details,
    }


# ----------------------------------------------------------------------
# 하위 명령
# ----------------------------------------------------------------------

def cmd_validate(args) -> dict:
    loaders = (("behavior", codec.decode_behavior), ("state", codec.decode_state),
               ("channel", codec.decode_channel), ("process", codec.decode_process),
               ("witness", codec.decode_witness))
    for kind, decode in loaders:
        path = getattr(args, kind, None)
        if path:
            obj = decode(codec.load_file(path))
            return {"valid": True, "kind": kind, "summary": _summary(kind, obj)}
    raise UsageError("validate: --behavior/--state/--channel/--process/--witness 중 하나가 필요합니다.")


def _summary(kind: str, obj) -> dict:
    if kind == "behavior":
        return {"scenario": codec.encode_scenario(obj.scenario), "no_signalling": obj.is_no_signalling()}
    if kind == "state":
        return {"dims": list(obj.dims.dims), "purity": obj.purity()}
    if kind == "channel":
        return {"in_dims": list(obj.in_dims.dims), "out_dims": list(obj.out_dims.dims)}
    if kind == "process":
        return {"delay": obj.delay, "instantaneous": obj.instantaneous, "classical": obj.classical}
    return {"normalization": obj.normalization, "delta_weight": obj.delta_weight, "dim": obj.dim}


def cmd_born(args) -> dict:
    state = codec.decode_state(codec.load_file(args.state))
    doc = codec.load_file(args.povms)
    if not isinstance(doc, dict) or "alice" not in doc or "bob" not in doc:
        raise ValidationError("❌ POVM 파일에는 alice / bob 측정 목록이 필요합니다.", invariant="povms-schema")
    a_povms = codec.decode_povm_family(doc["alice"])
    b_povms = codec.decode_povm_family(doc["bob"])
    return codec.encode_behavior(behavior_from_state(state, a_povms, b_povms))


def cmd_is_local(args) -> dict:
    b = codec.decode_behavior(codec.load_file(args.behavior))
    result = is_local(b)
    doc = {"local": result.local, "pivots": result.pivots}
    if result.weights is not None:
        doc["weights"] = result.weights
    if result.certificate is not None:
        doc["certificate"] = codec.encode_functional(result.certificate)
        doc["certificate"]["violation"] = result.certificate.violation(b)
    return doc


def cmd_chsh(args) -> dict:
    if args.behavior:
        b = codec.decode_behavior(codec.load_file(args.behavior))
        if b.scenario != CHSH_SCENARIO:
            raise ValidationError(f"❌ CHSH 값은 2x2x2x2 시나리오에서만 정의됩니다: {b.scenario.shape}",
                                  invariant="chsh-scenario")
        return {"chsh": chsh_value(b)}
    if args.state:
        state = codec.decode_state(codec.load_file(args.state))
        return {"horodecki": horodecki_chsh(state), "angle_search": chsh_angle_search(state, seed=args.seed)}
    raise UsageError("chsh: --behavior 또는 --state 가 필요합니다.")


def cmd_rel_ent(args) -> dict:
    b = codec.decode_behavior(codec.load_file(args.behavior))
    return measure_document(rel_entropy_nonlocality(b, restarts=args.restarts, seed=args.seed,
                                                    max_iters=args.max_iters))


def cmd_min_ext(args) -> dict:
    state = codec.decode_state(codec.load_file(args.state))
    scenario = Scenario(args.settings, args.settings, args.outcomes, args.outcomes)
    result = minimal_extension_state(state, scenario, use_filter=args.filter, restarts=args.restarts,
                                     rounds=args.rounds, seed=args.seed)
    return measure_document(result)


def _witness_from_args(args):
    if getattr(args, "witness", None):
        return codec.decode_witness(codec.load_file(args.witness))
    return build_chsh_povm_witness(normalization=NORMALIZATION_FLAGS[args.normalization])


def cmd_witness(args) -> dict:
    if args.action == "build":
        w = _witness_from_args(args)
        doc = codec.encode_witness(w)
        doc["block_traces"] = w.block_traces()
        doc["losr_min"] = losr_min_witness_value(w)
        return doc
    if args.action == "eval":
        if not args.channel:
            raise UsageError("witness eval: --channel 이 필요합니다.")
        w = _witness_from_args(args)
        channel = codec.decode_channel(codec.load_file(args.channel))
        return {
            "value": evaluate_witness(w, channel),
            "choi_contraction": witness_choi_contraction(w, channel),
            "losr_min": losr_min_witness_value(w),
            "normalization": w.normalization,
        }
    if not args.channel:
        raise UsageError("witness separate: --channel 이 필요합니다.")
    verdict = choi_separability(codec.decode_channel(codec.load_file(args.channel)))
    doc = {"verdict": verdict.verdict, "method": verdict.method, "min_pt_eigenvalue": verdict.min_pt_eigenvalue}
    if verdict.pt_eigenvalues is not None:
        doc["pt_eigenvalues"] = np.asarray(verdict.pt_eigenvalues)
    return doc


def cmd_process(args) -> dict:
    process = codec.decode_process(codec.load_file(args.process))
    if args.action == "check":
        return {"realizable": check_realizable(process), "instantaneous": process.instantaneous,
                "delay": process.delay}
    if args.action == "classify":
        c = classify(process)
        doc = {"instantaneous": c.instantaneous, "free": c.free, "resource_kind": c.resource_kind,
               "evidence": {k: v for k, v in c.evidence.items() if k != "certificate"}}
        if "certificate" in c.evidence:
            doc["evidence"]["certificate"] = codec.encode_functional(c.evidence["certificate"])
        if process.classical:
            doc["nonlocality"] = measure_document(process_nonlocality(process))
        return doc
    if args.superprocess:
        sp = codec.decode_superprocess(codec.load_file(args.superprocess), process)
    else:
        sp = codec.decode_superprocess({"form": "general", "pre_delay": args.pre_delay,
                                        "post_delay": args.post_delay}, process)
    return codec.encode_process(apply_superprocess(sp, process))


def cmd_demo(args) -> dict:
    return demo_hidden_nonlocality(kappa=args.kappa)


# ----------------------------------------------------------------------
# 파서
# ----------------------------------------------------------------------

def build_parser() -> CliParser:
    common = CliParser(add_help=False)
    common.add_argument("--out", help="결과 JSON 파일 (기본: stdout)")
    common.add_argument("--seed", type=int, default=None, help="난수 seed (기본: SimConfig.SEED)")
    common.add_argument("--restarts", type=int, default=None, help="solver 재시작 횟수")
    common.add_argument("--tol", type=float, default=None, help="두 solver 간 허용 간격 (SOLVER_GAP_TOL)")
    common.add_argument("--lp-tol", type=float, default=None, help="LP 허용오차 (LP_TOL)")
    common.add_argument("--db", default=None, help="결과를 기록할 DB URL (예: sqlite:///runs.db)")
    common.add_argument("-v", "--verbose", action="store_true", help="진행 상황을 stderr 로 출력")

    parser = CliParser(prog="bellsim", description="Bell 비국소성 / 지연 시간 프로세스 도구")
    sub = parser.add_subparsers(dest="command", parser_class=CliParser)
    sub.required = True

    p = sub.add_parser("validate", parents=[common], help="입력 JSON 검증")
    for kind in ("behavior", "state", "channel", "process", "witness"):
        p.add_argument(f"--{kind}")
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("born", parents=[common], help="상태 + POVM → 행동")
    p.add_argument("--state", required=True)
    p.add_argument("--povms", required=True, help='{"alice": [...], "bob": [...]}')
    p.set_defaults(handler=cmd_born)

    p = sub.add_parser("is-local", parents=[common], help="국소 폴리토프 LP 판정")
    p.add_argument("--behavior", required=True)
    p.set_defaults(handler=cmd_is_local)

    p = sub.add_parser("chsh", parents=[common], help="CHSH 값 (행동) 또는 최댓값 (상태)")
    p.add_argument("--behavior")
    p.add_argument("--state")
    p.set_defaults(handler=cmd_chsh)

    p = sub.add_parser("rel-ent", parents=[common], help="상대 엔트로피 비국소성")
    p.add_argument("--behavior", required=True)
    p.add_argument("--max-iters", type=int, default=None)
    p.set_defaults(handler=cmd_rel_ent)

    p = sub.add_parser("min-ext", parents=[common], help="상태의 최소 확장 하한 (seesaw)")
    p.add_argument("--state", required=True)
    p.add_argument("--settings", type=int, default=2)
    p.add_argument("--outcomes", type=int, default=2)
    p.add_argument("--rounds", type=int, default=None)
    p.add_argument("--filter", action="store_true", help="국소 필터 한 라운드 허용")
    p.set_defaults(handler=cmd_min_ext)

    p = sub.add_parser("witness", parents=[common], help="CHSH 증인 / Choi 분리 가능성")
    p.add_argument("action", choices=["build", "eval", "separate"])
    p.add_argument("--witness")
    p.add_argument("--channel")
    p.add_argument("--normalization", choices=sorted(NORMALIZATION_FLAGS), default="corrected")
    p.set_defaults(handler=cmd_witness)

    p = sub.add_parser("process", parents=[common], help="프로세스 분류 / 합성 / 구현 가능성")
    p.add_argument("action", choices=["classify", "compose", "check"])
    p.add_argument("--process", required=True)
    p.add_argument("--superprocess")
    p.add_argument("--pre-delay", type=float, default=0.0)
    p.add_argument("--post-delay", type=float, default=0.0)
    p.set_defaults(handler=cmd_process)

    p = sub.add_parser("demo", parents=[common], help="숨은 비국소성 필터 데모")
    p.add_argument("name", choices=["filtering"])
    p.add_argument("--kappa", type=float, default=0.5)
    p.set_defaults(handler=cmd_demo)
    return parser


def _overrides(args) -> Dict[str, object]:
    out = {}
    for flag, key in (("tol", "SOLVER_GAP_TOL"), ("lp_tol", "LP_TOL")):
        value = getattr(args, flag, None)
        if value is not None:
            if not value > 0:
                raise ValidationError(f"❌ --{flag.replace('_', '-')} 는 양수여야 합니다: {value}",
                                      invariant="tolerance>0")
            out[key] = value
    if getattr(args, "restarts", None) is not None and args.restarts < 1:
        raise ValidationError(f"❌ --restarts 는 1 이상이어야 합니다: {args.restarts}", invariant="restarts>=1")
    if getattr(args, "verbose", False):
        out["VERBOSE"] = True
    return out


def _emit(document: dict, out: Optional[str]):
    text = codec.dumps(document)
    if out:
        with open(out, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _record(args, document: dict):
    url = args.db or (SimConfig.DB_URL if SimConfig.ENABLE_DB else None)
    if not url:
        return
    db_manager.init_db(url)
    record_run(args.command, {k: v for k, v in vars(args).items() if k != "handler"}, codec.to_jsonable(document))


def _diagnostic(message: str, **fields):
    print(codec.dumps({"error": message, **fields}), file=sys.stderr)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        _diagnostic(str(e), kind="usage")
        return EXIT_USAGE

    try:
        with SimConfig.override(**_overrides(args)):
            echo(f"🚀 bellsim {args.command} 시작")
            document = args.handler(args)
            _emit(document, args.out)
            _record(args, document)
    except UsageError as e:
        _diagnostic(str(e), kind="usage")
        return EXIT_USAGE
    except codec.CodecError as e:
        _diagnostic(str(e), kind="malformed-json", line=e.line, column=e.column)
        return EXIT_DATA
    except ValidationError as e:
        _diagnostic(str(e), kind="validation", invariant=e.invariant)
        return EXIT_VALIDATION
    except SolverError as e:
        _diagnostic(str(e), kind="solver")
        return EXIT_NOT_CONVERGED
    except ValueError as e:
        _diagnostic(f"❌ {e}", kind="validation", invariant="unspecified")
        return EXIT_VALIDATION

    if _not_converged(document):
        echo("⚠️ solver 가 수렴 기준을 만족하지 못했습니다 (결과는 출력됨).", force=True)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _not_converged(document) -> bool:
    if isinstance(document, dict):
        if document.get("converged") is False:
            return True
        return any(_not_converged(v) for v in document.values())
    return False


if __name__ == "__main__":
    sys.exit(main())
