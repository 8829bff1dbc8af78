from pncsim.pnc.demappers import (
    bit_llrs_to_symbol_logprob,
    demap_nc_symbol_prob,
    demap_pair_prob,
    demap_user_bit_llr,
    demap_user_symbol_prob,
    demap_xor_bit_llr,
)
from pncsim.pnc.mapping import NcMap, broadcast_recover, check_exclusive_law, nc_map, unit_pairs
from pncsim.pnc.receivers import (
    RelayDecision,
    receive_cd_nc,
    receive_iterative_xor_cd,
    receive_mud_nc,
    receive_mud_xor,
    receive_nc_cd,
    receive_xor_cd,
)
from pncsim.pnc.superimposed import (
    AmbiguityReport,
    SuperimposedSet,
    build_superimposed_set,
    detect_ambiguity,
    select_coefficients,
    write_superimposed_csv,
)

__all__ = [
    "AmbiguityReport",
    "NcMap",
    "RelayDecision",
    "SuperimposedSet",
    "bit_llrs_to_symbol_logprob",
    "broadcast_recover",
    "build_superimposed_set",
    "check_exclusive_law",
    "demap_nc_symbol_prob",
    "demap_pair_prob",
    "demap_user_bit_llr",
    "demap_user_symbol_prob",
    "demap_xor_bit_llr",
    "detect_ambiguity",
    "nc_map",
    "receive_cd_nc",
    "receive_iterative_xor_cd",
    "receive_mud_nc",
    "receive_mud_xor",
    "receive_nc_cd",
    "receive_xor_cd",
    "select_coefficients",
    "unit_pairs",
    "write_superimposed_csv",
]
