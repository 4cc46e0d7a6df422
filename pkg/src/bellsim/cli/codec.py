"""
CLI JSON 입출력 형식

- 복소수 원소: [re, im] 쌍 (실수 하나만 써도 됨)
- 상태   : {"dims": [2, 2], "matrix": [[...]]} | {"dims": [...], "vector": [...]} | {"name": "werner", "p": 0.8}
- 행동   : {"scenario": {"nx0", "ny0", "nx1", "ny1"}, "table": 4차원 배열 (x0, y0, x1, y1)} | {"name": "pr_box"}
- 채널   : {"representation": "choi" | "kraus", "in_dims": [...], "out_dims": [...], "choi" | "kraus": ...}
- 프로세스: {"channel": 채널 또는 행동, "delay": 숫자 | "inf", "separated": bool}
- 증인   : {"normalization", "delta_weight", "psi", "phi", "blocks"}
"""
import json
import math
from typing import Any

import numpy as np

from bellsim.core import ValidationError, DimensionMismatchError
from bellsim.core.tensor import DimFactorization
from bellsim.builder.states import DensityMatrix, Povm, pure_state, phi_plus, psi_minus, werner_state
from bellsim.builder.channels import QuantumChannel, kraus_to_choi, bipartite_identity
from bellsim.analysis.locality import (
    Behavior, Scenario, BellFunctional, pr_box, tsirelson_behavior, uniform_behavior, noisy_pr_box,
    behavior_to_channel,
)
from bellsim.analysis.witness import WitnessOperator, build_chsh_povm_witness
from bellsim.process.model import Process
from bellsim.process.superprocess import Superprocess, SuperprocessForm, LocalMember


class CodecError(ValueError):
    """JSON 문법 오류 (줄/열 위치 포함)"""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(message)
        self.line = line
        self.column = column


# ----------------------------------------------------------------------
# 파일 / 문자열
# ----------------------------------------------------------------------

def loads(text: str, source: str = "<input>") -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise CodecError(f"❌ {source}: JSON 파싱 실패 (line {e.lineno}, column {e.colno}): {e.msg}",
                         e.lineno, e.colno) from e


def load_file(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ValidationError(f"❌ 입력 파일을 읽을 수 없습니다: {path} ({e.strerror})", invariant="input-file") from e
    return loads(text, path)


def dumps(document: Any) -> str:
    """키 정렬 + 최단 왕복 float 표기 (같은 입력이면 같은 바이트)"""
    return json.dumps(to_jsonable(document), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False)


def to_jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return encode_complex(obj)
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


# ----------------------------------------------------------------------
# 복소 행렬
# ----------------------------------------------------------------------

def encode_complex(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return np.stack([m.real, m.imag], axis=-1).tolist()


def decode_complex(data, what: str = "matrix", ndim: int = 2) -> np.ndarray:
    """
    [re, im] 쌍 또는 실수로 된 중첩 배열 → 복소 ndarray

    :param ndim: 기대하는 배열 차수 (행렬 2, 벡터 1). 차수가 하나 더 많고 마지막 축이 2 이면 [re, im] 로 읽는다.
    """
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as e:
        raise ValidationError(f"❌ {what}: 숫자 배열이 아닙니다.", invariant="numeric-array") from e
    if arr.ndim == ndim + 1 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim == ndim:
        return arr.astype(complex)
    raise DimensionMismatchError(f"❌ {what}: {ndim}차 배열 (또는 [re, im] 쌍) 이 필요한데 shape {arr.shape} 입니다.")


def _require(doc: dict, key: str, what: str):
    if not isinstance(doc, dict) or key not in doc:
        raise ValidationError(f"❌ {what} 에 '{key}' 필드가 없습니다.", invariant=f"{what}-schema")
    return doc[key]


def _dims(doc: dict, key: str, what: str) -> list:
    dims = _require(doc, key, what)
    if not isinstance(dims, list) or not all(isinstance(d, int) for d in dims):
        raise ValidationError(f"❌ {what}.{key} 는 정수 배열이어야 합니다.", invariant=f"{what}-schema")
    return dims


# ----------------------------------------------------------------------
# 상태 / POVM
# ----------------------------------------------------------------------

def decode_state(doc: dict) -> DensityMatrix:
    if isinstance(doc, dict) and "name" in doc:
        name = doc["name"]
        if name == "phi_plus":
            return phi_plus(int(doc.get("d", 2)))
        if name == "psi_minus":
            return psi_minus()
        if name == "werner":
            return werner_state(float(_require(doc, "p", "state")))
        raise ValidationError(f"❌ 알 수 없는 상태 이름: {name}", invariant="state-name")
    dims = _dims(doc, "dims", "state")
    factors = DimFactorization(tuple(dims), ("A", "B") if len(dims) == 2 else ())
    if "vector" in doc:
        return pure_state(decode_complex(doc["vector"], "state.vector", ndim=1), factors)
    return DensityMatrix(decode_complex(_require(doc, "matrix", "state"), "state.matrix"), factors)


def encode_state(rho: DensityMatrix) -> dict:
    return {"dims": list(rho.dims.dims), "matrix": encode_complex(rho.matrix)}


def decode_povm(doc) -> Povm:
    """효과 행렬 목록"""
    if isinstance(doc, dict):
        doc = _require(doc, "effects", "povm")
    if not isinstance(doc, list) or not doc:
        raise ValidationError("❌ POVM 은 효과 행렬의 비어 있지 않은 목록이어야 합니다.", invariant="povm-schema")
    effects = tuple(decode_complex(e, "povm.effect") for e in doc)
    return Povm(effects, [effects[0].shape[0]])


def decode_povm_family(doc) -> list:
    """설정별 POVM 목록"""
    if not isinstance(doc, list) or not doc:
        raise ValidationError("❌ 측정 설정 목록이 비었습니다.", invariant="povm-schema")
    return [decode_povm(p) for p in doc]


# ----------------------------------------------------------------------
# 행동
# ----------------------------------------------------------------------

_NAMED_BEHAVIORS = {
    "pr_box": pr_box,
    "tsirelson": tsirelson_behavior,
    "uniform": uniform_behavior,
}


def decode_behavior(doc: dict) -> Behavior:
    if isinstance(doc, dict) and "name" in doc:
        name = doc["name"]
        if name == "noisy_pr_box":
            return noisy_pr_box(float(_require(doc, "visibility", "behavior")))
        if name not in _NAMED_BEHAVIORS:
            raise ValidationError(f"❌ 알 수 없는 행동 이름: {name}", invariant="behavior-name")
        return _NAMED_BEHAVIORS[name]()
    table = np.asarray(_require(doc, "table", "behavior"), dtype=float)
    if "scenario" in doc:
        s = doc["scenario"]
        scenario = Scenario(*(int(_require(s, k, "behavior.scenario")) for k in ("nx0", "ny0", "nx1", "ny1")))
        if table.shape != scenario.shape:
            raise DimensionMismatchError(f"❌ 확률표 크기 {table.shape} ≠ 시나리오 {scenario.shape}")
        return Behavior(scenario, table)
    return Behavior.from_table(table)


def encode_scenario(s: Scenario) -> dict:
    return {"nx0": s.n_x0, "ny0": s.n_y0, "nx1": s.n_x1, "ny1": s.n_y1}


def encode_behavior(b: Behavior) -> dict:
    return {"scenario": encode_scenario(b.scenario), "table": b.table.tolist()}


def encode_functional(f: BellFunctional) -> dict:
    return {"name": f.name, "bound": f.bound, "coefficients": f.coefficients.tolist(),
            "scenario": encode_scenario(f.scenario)}


# ----------------------------------------------------------------------
# 채널 / 프로세스
# ----------------------------------------------------------------------

def decode_channel(doc: dict) -> QuantumChannel:
    if isinstance(doc, dict) and ("table" in doc or "name" in doc) and "representation" not in doc:
        return behavior_to_channel(decode_behavior(doc))
    in_dims = _dims(doc, "in_dims", "channel")
    out_dims = _dims(doc, "out_dims", "channel")
    rep = doc.get("representation", "choi")
    if rep == "choi":
        return QuantumChannel(decode_complex(_require(doc, "choi", "channel"), "channel.choi"), in_dims, out_dims)
    if rep == "kraus":
        ops = [decode_complex(k, "channel.kraus") for k in _require(doc, "kraus", "channel")]
        return kraus_to_choi(ops, in_dims, out_dims)
    raise ValidationError(f"❌ 알 수 없는 채널 표현: {rep}", invariant="channel-representation")


def encode_channel(ch: QuantumChannel) -> dict:
    return {"representation": "choi", "in_dims": list(ch.in_dims.dims),
            "out_dims": list(ch.out_dims.dims), "choi": encode_complex(ch.choi)}


def decode_delay(value) -> float:
    if value == "inf":
        return math.inf
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"❌ delay 는 숫자 또는 \"inf\" 여야 합니다: {value!r}", invariant="delay-schema")
    return float(value)


def decode_process(doc: dict) -> Process:
    channel = decode_channel(_require(doc, "channel", "process"))
    return Process(channel, decode_delay(doc.get("delay", 0.0)), bool(doc.get("separated", True)))


def encode_process(p: Process) -> dict:
    return {"channel": encode_channel(p.channel), "delay": p.delay, "separated": p.spatially_separated}


# ----------------------------------------------------------------------
# 증인
# ----------------------------------------------------------------------

def encode_witness(w) -> dict:
    return {
        "normalization": w.normalization,
        "delta_weight": w.delta_weight,
        "psi": encode_complex(w.psi),
        "phi": encode_complex(w.phi),
        "labels": ["A0'", "B0'", "X1", "Y1"],
        "blocks": encode_complex(w.blocks),
    }


def decode_witness(doc: dict):
    normalization = doc.get("normalization", "corrected_3_16_delta_quarter")
    psi = decode_complex(doc["psi"], "witness.psi") if "psi" in doc else None
    phi = decode_complex(doc["phi"], "witness.phi") if "phi" in doc else None
    if "blocks" not in doc:
        return build_chsh_povm_witness(psi, phi, normalization, doc.get("delta_weight"))
    blocks = decode_complex(doc["blocks"], "witness.blocks", ndim=4)
    if psi is None or phi is None:
        raise ValidationError("❌ blocks 를 준 증인에는 psi / phi 도 필요합니다.", invariant="witness-schema")
    return WitnessOperator(blocks, psi, phi, normalization, float(_require(doc, "delta_weight", "witness")))


# ----------------------------------------------------------------------
# 슈퍼프로세스 (LOSR / GENERAL)
# ----------------------------------------------------------------------

def decode_superprocess(doc: dict, process: Process = None) -> Superprocess:
    """
    {"form": "losr", "members": [{"weight", "pre_a", "pre_b", "post_a", "post_b"}]}
    {"form": "general", "pre": 채널, "post": 채널, "pre_delay", "post_delay"}  (pre/post 생략 시 항등)
    """
    form = SuperprocessForm(_require(doc, "form", "superprocess"))
    if form is SuperprocessForm.LOSR:
        members = []
        for m in _require(doc, "members", "superprocess"):
            members.append(LocalMember(float(_require(m, "weight", "member")),
                                       *(decode_channel(_require(m, k, "member"))
                                         for k in ("pre_a", "pre_b", "post_a", "post_b"))))
        return Superprocess(form, members=tuple(members))
    if form is SuperprocessForm.GENERAL:
        if process is None and ("pre" not in doc or "post" not in doc):
            raise ValidationError("❌ 항등 pre/post 를 쓰려면 프로세스가 필요합니다.", invariant="general-stages")
        pre = decode_channel(doc["pre"]) if "pre" in doc else bipartite_identity(*process.channel.in_dims.dims)
        post = decode_channel(doc["post"]) if "post" in doc else bipartite_identity(*process.channel.out_dims.dims)
        return Superprocess(form, pre=pre, post=post,
                            pre_delay=decode_delay(doc.get("pre_delay", 0.0)),
                            post_delay=decode_delay(doc.get("post_delay", 0.0)))
    raise ValidationError("❌ PRE_LOCC 슈퍼프로세스는 JSON 으로 받지 않습니다 (라이브러리 API 사용).",
                          invariant="superprocess-form")
