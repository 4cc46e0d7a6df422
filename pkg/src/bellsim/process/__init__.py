# src/bellsim/process/__init__.py

from .model import Process, check_realizable
from .lose import lose_construct, controlled_local, flagged_mixture
from .superprocess import (
    SuperprocessForm, LocalMember, LocalPost, Superprocess, apply_superprocess,
    check_superprocess_form, identity_superprocess, losr_superprocess, reduce_to_state_resource,
)
