# src/bellsim/analysis/__init__.py

# witness / measures 는 process 패키지를 쓰므로 여기서 미리 import 하지 않는다 (순환 방지)
from .locality import (
    Scenario, CHSH_SCENARIO, Behavior, BellFunctional, LocalityResult,
    is_local, chsh_value, chsh_functionals, vertex_matrix, enumerate_local_vertices,
    uniform_behavior, pr_box, noisy_pr_box, tsirelson_behavior, mix_behaviors, relabel,
    behavior_from_state, behavior_from_prelocc, behavior_to_channel, channel_to_behavior,
    horodecki_chsh, chsh_angle_search, demo_hidden_nonlocality,
)
