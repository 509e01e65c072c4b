"""Figure specification files: flat key-value text with two sections.

    [figure]
    kind = traces | rates_vs_gamma | ratios_vs_m | resampling_bars
    out = figure.svg          ; .svg (default format) or .png
    metric = regret | risk    ; traces only, default regret

    [inputs]
    <label> = <csv path>      ; one line per input curve

The traces kind accepts several inputs (one band per labelled rounds CSV);
the other kinds take exactly one input.
"""

import configparser
from dataclasses import dataclass, field

from .schemas import SCHEMAS

KINDS = tuple(SCHEMAS)


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    out: str
    inputs: tuple  # ((label, path), ...)
    metric: str = "regret"
    band: str = "one-sigma"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpecError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise SpecError("at least one input CSV is required")
        if self.kind != "traces" and len(self.inputs) != 1:
            raise SpecError(f"kind {self.kind!r} takes exactly one input CSV")
        if self.metric not in ("regret", "risk"):
            raise SpecError(f"unknown metric {self.metric!r}")
        if self.band != "one-sigma":
            raise SpecError("only one-sigma bands are supported")


def parse_spec(path):
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    if not parser.read(path):
        raise SpecError(f"spec file {path!r} not found")
    if not parser.has_section("figure"):
        raise SpecError("spec is missing the [figure] section")
    kind = parser.get("figure", "kind", fallback=None)
    out = parser.get("figure", "out", fallback=None)
    if not kind or not out:
        raise SpecError("the [figure] section needs both 'kind' and 'out'")
    metric = parser.get("figure", "metric", fallback="regret")
    band = parser.get("figure", "band", fallback="one-sigma")
    if not parser.has_section("inputs") or not parser.options("inputs"):
        raise SpecError("spec is missing a nonempty [inputs] section")
    inputs = tuple((label, parser.get("inputs", label))
                   for label in parser.options("inputs"))
    return FigureSpec(kind=kind, out=out, inputs=inputs, metric=metric, band=band)
