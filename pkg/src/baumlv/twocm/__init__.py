"""2-counter machines and their BAUML encodings."""

from .encoders import (
    ENCODERS, EXPECTED_VERDICT, encode, encode_bidirectional, encode_shared, encode_source,
    encode_unidirectional, encode_unrestricted,
)
from .machine import (
    CDec, CounterMachine, Halt, Inc, RunResult, desk_suite, format_machine, normalize_input,
    parse_machine, random_machine, run,
)

__all__ = [
    "CDec", "CounterMachine", "Halt", "Inc", "RunResult", "desk_suite", "format_machine",
    "normalize_input", "parse_machine", "random_machine", "run",
    "ENCODERS", "EXPECTED_VERDICT", "encode", "encode_source", "encode_unrestricted",
    "encode_unidirectional", "encode_bidirectional", "encode_shared",
]
