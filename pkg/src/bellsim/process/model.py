"""
지연 시간(delay)이 붙은 양자 프로세스 (𝒩, Δx, Δt)

시간은 추상 단위이고, Δx 는 고정된 값이라 '공간적으로 떨어져 있는가' 하나로만 본다.
"""
import math
from dataclasses import dataclass
from typing import Union

from bellsim.core import ValidationError
from bellsim.builder.channels import QuantumChannel, is_signalling, is_classical
from bellsim.analysis.locality import Behavior, behavior_to_channel, channel_to_behavior


@dataclass(frozen=True, eq=False)
class Process:
    """
    :param channel: 이분 채널 (Behavior 를 주면 고전 채널로 감싼다)
    :param delay: 입력-출력 지연 (0 이상, math.inf 허용)
    :param spatially_separated: 두 행위자가 공간적으로 떨어져 있는지
    """
    channel: Union[QuantumChannel, Behavior]
    delay: float = 0.0
    spatially_separated: bool = True

    def __post_init__(self):
        channel = self.channel
        if isinstance(channel, Behavior):
            channel = behavior_to_channel(channel)
        if not isinstance(channel, QuantumChannel):
            raise ValidationError(f"❌ 프로세스 채널 타입이 올바르지 않습니다: {type(channel).__name__}",
                                  invariant="channel-type")
        if not channel.is_bipartite():
            raise ValidationError("❌ 프로세스 채널은 (A0,B0)→(A1,B1) 이분 채널이어야 합니다.",
                                  invariant="bipartite-labels")
        delay = float(self.delay)
        if math.isnan(delay) or delay < 0:
            raise ValidationError(f"❌ 지연 시간은 0 이상이어야 합니다: {self.delay}", invariant="delay>=0")
        object.__setattr__(self, "channel", channel)
        object.__setattr__(self, "delay", delay)
        object.__setattr__(self, "spatially_separated", bool(self.spatially_separated))

    @property
    def instantaneous(self) -> bool:
        return self.delay == 0.0

    @property
    def classical(self) -> bool:
        return is_classical(self.channel)

    def behavior(self) -> Behavior:
        return channel_to_behavior(self.channel)

    def with_delay(self, delay: float) -> "Process":
        return Process(self.channel, delay, self.spatially_separated)


def check_realizable(process: Process) -> bool:
    """
    순간(Δt = 0) 프로세스가 공간적으로 떨어진 두 점 사이에서 신호를 보내면 물리적으로 구현 불가
    """
    if not (process.instantaneous and process.spatially_separated):
        return True
    a_to_b, b_to_a = is_signalling(process.channel)
    return not (a_to_b or b_to_a)
