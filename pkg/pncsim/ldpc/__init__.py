from pncsim.ldpc.binary import decode_binary_spa
from pncsim.ldpc.code import (
    EncoderPlan,
    LdpcCode,
    construct_regular,
    encode,
    information,
    read_alist,
    syndrome,
    write_alist,
)
from pncsim.ldpc.decoder import DecodeResult, DecoderConfig
from pncsim.ldpc.groups import MessageGroup, OpCounter
from pncsim.ldpc.nonbinary import (
    check_update_direct,
    check_update_fft,
    decode_cspa,
    decode_gspa,
    gspa_check_update_2dfft,
    gspa_check_update_ems,
)

__all__ = [
    "DecodeResult",
    "DecoderConfig",
    "EncoderPlan",
    "LdpcCode",
    "MessageGroup",
    "OpCounter",
    "check_update_direct",
    "check_update_fft",
    "construct_regular",
    "decode_binary_spa",
    "decode_cspa",
    "decode_gspa",
    "encode",
    "gspa_check_update_2dfft",
    "gspa_check_update_ems",
    "information",
    "read_alist",
    "syndrome",
    "write_alist",
]
