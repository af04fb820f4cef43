"""Compile a small integer language to rate-independent chemical reaction networks."""

from .codegen import compile_program, compile_source
from .crn import Crn, RateConfig, Tier
from .diagnostics import CcxError, Diagnostic
from .emitter import emit_cain_xml, emit_crn_text, parse_cain_xml
from .frontend import parse, parse_source, tokenize
from .interpreter import interpret
from .semantics import analyze, check_supported
from .simulator import SimConfig, run_ensemble, simulate

__all__ = [
    "CcxError", "Crn", "Diagnostic", "RateConfig", "SimConfig", "Tier",
    "analyze", "check_supported", "compile_program", "compile_source",
    "emit_cain_xml", "emit_crn_text", "interpret", "parse", "parse_cain_xml",
    "parse_source", "run_ensemble", "simulate", "tokenize",
]
