"""Option-chain CSV files, synthetic chains and JSON run configuration.

Canonical CSV layout (UTF-8, LF line endings, header required)::

    strike,call_bid,call_ask,call_mid,quoted_iv,quoted_delta

Empty fields are missing values. ``call_mid`` is recomputed as
``(bid + ask)/2`` whenever both quotes are present; otherwise it must be
given. ``quoted_iv`` is a decimal fraction (0.1615, not 16.15).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import models
from .errors import ChainError, DomainError
from .rnd import MarketContext

__all__ = ["Quote", "OptionChain", "RunConfig", "CSV_FIELDS", "load_chain", "save_chain", "synth_chain"]

CSV_FIELDS = ("strike", "call_bid", "call_ask", "call_mid", "quoted_iv", "quoted_delta")


@dataclass(frozen=True)
class Quote:
    strike: float
    call_mid: float
    call_bid: float | None = None
    call_ask: float | None = None
    quoted_iv: float | None = None
    quoted_delta: float | None = None


@dataclass(frozen=True)
class OptionChain:
    rows: tuple[Quote, ...]
    symbol: str = ""
    dte_days: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        _validate(self.rows)

    def __len__(self):
        return len(self.rows)

    @property
    def strikes(self) -> np.ndarray:
        return np.array([q.strike for q in self.rows])

    @property
    def mids(self) -> np.ndarray:
        return np.array([q.call_mid for q in self.rows])

    def atm_quote(self, spot: float) -> Quote:
        return min(self.rows, key=lambda q: abs(q.strike - spot))

    def atm_iv(self, spot: float) -> float | None:
        """Quoted implied volatility nearest the money, if the chain carries any."""
        quoted = [q for q in self.rows if q.quoted_iv is not None]
        if not quoted:
            return None
        return min(quoted, key=lambda q: abs(q.strike - spot)).quoted_iv


def _validate(rows, first_row=1):
    """Check a quote sequence; ``first_row`` is the row number reported for ``rows[0]``."""
    if not rows:
        raise ChainError("chain is empty")
    prev = -math.inf
    for i, q in enumerate(rows, start=first_row):
        if q.strike == prev:
            raise ChainError(f"duplicated strike {q.strike:g}", row=i)
        if not q.strike > prev:
            raise ChainError(f"strikes not increasing at {q.strike:g}", row=i)
        if not q.strike > 0:
            raise ChainError(f"strike must be positive, got {q.strike:g}", row=i)
        if not q.call_mid > 0:
            raise ChainError(f"call price must be positive at strike {q.strike:g}", row=i)
        prev = q.strike


def _num(text, name, row):
    text = text.strip() if text is not None else ""
    if text == "":
        return None
    try:
        value = float(text)
    except ValueError:
        raise ChainError(f"cannot parse {name}={text!r}", row=row) from None
    if not math.isfinite(value):
        raise ChainError(f"non-finite {name}", row=row)
    return value


def load_chain(path, symbol: str = "", dte_days: int | None = None) -> OptionChain:
    """Read and validate a chain in the canonical CSV layout.

    Row numbers in errors count the header as row 1.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ChainError(f"{path} is empty")
        if "strike" not in reader.fieldnames:
            raise ChainError("missing 'strike' column", row=1)
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            vals = {name: _num(rec.get(name), name, lineno) for name in CSV_FIELDS}
            if vals["strike"] is None:
                raise ChainError("missing strike", row=lineno)
            bid, ask = vals["call_bid"], vals["call_ask"]
            mid = 0.5 * (bid + ask) if bid is not None and ask is not None else vals["call_mid"]
            if mid is None:
                raise ChainError(f"no call price at strike {vals['strike']:g}", row=lineno)
            rows.append(Quote(vals["strike"], mid, bid, ask, vals["quoted_iv"], vals["quoted_delta"]))
    if not rows:
        raise ChainError(f"{path} has no data rows")
    _validate(rows, first_row=2)
    return OptionChain(tuple(rows), symbol or path.stem, dte_days)


def _fmt(v):
    return "" if v is None else repr(float(v))


def save_chain(chain: OptionChain, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for q in chain.rows:
            w.writerow([_fmt(q.strike), _fmt(q.call_bid), _fmt(q.call_ask), _fmt(q.call_mid),
                        _fmt(q.quoted_iv), _fmt(q.quoted_delta)])


def synth_chain(model: str, true_params, ctx: MarketContext, strikes, noise: float = 0.0,
                seed: int = 0, symbol: str = "SYNTH") -> OptionChain:
    """Chain of model prices at ``strikes``, plus optional N(0, noise^2) quote noise."""
    k = np.asarray(strikes, dtype=float)
    if k.size == 0:
        raise ChainError("no strikes given")
    prices = models.price(model, true_params, ctx, k)
    if noise > 0:
        prices = prices + np.random.default_rng(seed).normal(0.0, noise, size=k.size)
    elif noise < 0:
        raise DomainError("noise must be >= 0")
    dte = round(ctx.ttm_years * 365)
    return OptionChain(tuple(Quote(float(a), float(b)) for a, b in zip(k, prices)), symbol, dte)


@dataclass
class RunConfig:
    """Market inputs and calibration settings for one run, as stored in JSON."""

    spot: float
    rate: float
    div_yield: float
    dte_days: float
    models: list[str] = field(default_factory=lambda: ["bs", "gg", "igg", "heston"])
    initial_params: dict[str, dict[str, float]] = field(default_factory=dict)
    seed: int = 0
    paths: int = 30000

    def __post_init__(self):
        self.context()  # validates
        bad = [m for m in self.models if m not in models.MODEL_IDS]
        if bad:
            raise DomainError(f"unknown models {bad}")

    def context(self) -> MarketContext:
        return MarketContext.from_dte(self.spot, self.rate, self.div_yield, self.dte_days)

    @classmethod
    def from_json(cls, text_or_path):
        text = str(text_or_path)
        if not text.lstrip().startswith("{"):
            text = Path(text).read_text(encoding="utf-8")
        return cls(**json.loads(text))

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)
