"""State and action representations of the Mujoco locomotion environments.

Only the representations are provided; there is no environment or transition
model code here. Swimmer mixes two reflection factors and is realized over the
Z2xZ2 block carrier (``P[0:1]`` is the left/right pseudoscalar, ``V[1:3]`` the
up/down swap), which gives a 10-dimensional state.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from ..core.errors import UnknownEnvironmentError
from .groups import GroupSpec, get_group
from .reps import Rep, parse_rep

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CatalogEntry:
    group: str
    state: str
    action: str
    # Raw state size including unobserved coordinates; None where quaternions
    # were converted to rotation matrices and the sizes are not comparable.
    reference_state_dim: Optional[int]
    note: str = ""


CATALOG: Dict[str, CatalogEntry] = {
    "Hopper": CatalogEntry("Z2", "R+P^5+R+P^4", "P^3", 12),
    "Swimmer": CatalogEntry(
        "Z2xZ2",
        "R+P[0:1]+P[0:1]*V[1:3]+(R+P[0:1])^2+P[0:1]*V[1:3]",
        "P[0:1]*V[1:3]",
        10,
        note="V-updown width taken as 2; unlabelled P read as P-leftright",
    ),
    "HalfCheetah": CatalogEntry("Z2", "R+P^8+R+P^7", "P^6", 18),
    "Walker2d": CatalogEntry("Z2", "R^2+V^3+R^3+V^3", "V^3", 18),
    "Ant": CatalogEntry(
        "Z4",
        "R^5+V^2+R^6+V^2",
        "V^2",
        None,
        note="V is the 4x4 cyclic leg permutation",
    ),
    "Humanoid": CatalogEntry("SO(2)z", "R+V*V+R^17+V^2+R^17", "R^17", None),
}


def mujoco_catalog(env_name: str) -> Tuple[Rep, Rep, GroupSpec]:
    """Return (state_rep, action_rep, group) for a locomotion environment.

    Raises:
        UnknownEnvironmentError: If ``env_name`` is not in the catalog
    """
    entry = CATALOG.get(env_name)
    if entry is None:
        raise UnknownEnvironmentError(
            f"Unknown environment '{env_name}' (known: {', '.join(CATALOG)})"
        )
    group = get_group(entry.group)
    state = parse_rep(entry.state, group.base_dim)
    action = parse_rep(entry.action, group.base_dim)
    return state, action, group


def catalog_report() -> List[Dict[str, object]]:
    """Per-environment dimensions, flagging entries that need interpretation."""
    rows = []
    for name, entry in CATALOG.items():
        state, action, group = mujoco_catalog(name)
        flagged = bool(entry.note)
        if flagged:
            logger.warning(f"{name}: {entry.note} (state dim {state.dim})")
        rows.append(
            {
                "environment": name,
                "group": group.name,
                "state_rep": entry.state,
                "state_dim": state.dim,
                "action_rep": entry.action,
                "action_dim": action.dim,
                "reference_state_dim": entry.reference_state_dim,
                "flagged": flagged,
                "note": entry.note,
            }
        )
    return rows
