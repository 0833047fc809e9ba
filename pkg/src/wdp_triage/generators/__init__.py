"""Instance generators package."""

from wdp_triage.generators.base import (
    EASY,
    HARD,
    Certificate,
    FamilyRegistry,
    InstanceFamily,
    LabeledInstance,
    MixConfig,
    TrapConfig,
    spawn_seeds,
)
from wdp_triage.generators.mis import (
    ErdosRenyiMisFamily,
    StarMisFamily,
    gen_erdos_renyi_mis,
    gen_star_trap_mis,
)
from wdp_triage.generators.mixed import MixedFamily, gen_mixed, mix_config_from_options
from wdp_triage.generators.traps import (
    TRAP_PRESETS,
    KStarFamily,
    PresetFamily,
    TrapFamily,
    gen_kstar,
    gen_preset,
    gen_trap,
)

__all__ = [
    "EASY",
    "HARD",
    "TRAP_PRESETS",
    "Certificate",
    "ErdosRenyiMisFamily",
    "FamilyRegistry",
    "InstanceFamily",
    "KStarFamily",
    "LabeledInstance",
    "MixConfig",
    "MixedFamily",
    "PresetFamily",
    "StarMisFamily",
    "TrapConfig",
    "TrapFamily",
    "gen_erdos_renyi_mis",
    "gen_kstar",
    "gen_mixed",
    "gen_preset",
    "gen_star_trap_mis",
    "gen_trap",
    "mix_config_from_options",
    "spawn_seeds",
]
