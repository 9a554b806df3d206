"""JSON market files"""

import json
from json.decoder import WHITESPACE, scanstring
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from src.core.market import CommittedSet, Market, Matching, PairKey
from src.core.validation import ensure_valid
from src.utils.errors import MarketFileError

SINGLE = "∅"

PartnerRef = Optional[Union[int, str]]


def _parse_partner(value: PartnerRef) -> Optional[int]:
    if value is None or value == SINGLE:
        return None
    if isinstance(value, int) and value >= 0:
        return value
    raise ValueError(f"expected a non-negative index or '{SINGLE}', got {value!r}")


def _render_partner(value: Optional[int]) -> Union[int, str]:
    return SINGLE if value is None else int(value)


class CoupleEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    man: int = Field(ge=0)
    woman: int = Field(ge=0)
    committed: bool = True
    q: List[float]
    Q: List[float]
    assignable_m: Optional[List[float]] = None
    assignable_w: Optional[List[float]] = None


class PriceEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    m: PartnerRef
    w: PartnerRef
    p: List[float]
    P: List[float]

    @field_validator("m", "w")
    @classmethod
    def check_partner(cls, value: PartnerRef) -> PartnerRef:
        _parse_partner(value)
        return value

    @property
    def key(self) -> PairKey:
        return _parse_partner(self.m), _parse_partner(self.w)


class IncomeEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    m: PartnerRef
    w: PartnerRef
    y: float

    @field_validator("m", "w")
    @classmethod
    def check_partner(cls, value: PartnerRef) -> PartnerRef:
        _parse_partner(value)
        return value

    @property
    def key(self) -> PairKey:
        return _parse_partner(self.m), _parse_partner(self.w)


class MarketFile(BaseModel):
    """On-disk market: couples with bundles, then price and income tables"""
    model_config = ConfigDict(extra="forbid")

    n_private: int = Field(ge=1)
    n_public: int = Field(ge=0)
    couples: List[CoupleEntry]
    prices: List[PriceEntry]
    incomes: List[IncomeEntry]

    def to_market(self) -> Market:
        """Build the Market; shape problems raise MarketFileError"""
        k = len(self.couples)
        if k == 0:
            raise MarketFileError("couples: at least one couple is required")
        q_obs = np.zeros((k, self.n_private))
        Q_obs = np.zeros((k, self.n_public))
        has_assignable = any(c.assignable_m is not None or c.assignable_w is not None for c in self.couples)
        assignable_m = np.zeros((k, self.n_private)) if has_assignable else None
        assignable_w = np.zeros((k, self.n_private)) if has_assignable else None
        flags = [False] * k
        seen_men, seen_women = set(), set()

        for i, couple in enumerate(self.couples):
            where = f"couples.{i}"
            if couple.man >= k or couple.woman >= k:
                raise MarketFileError(f"{where}: index out of range for {k} couples")
            if couple.man in seen_men or couple.woman in seen_women:
                raise MarketFileError(f"{where}: agent listed in two couples")
            seen_men.add(couple.man)
            seen_women.add(couple.woman)
            q_obs[couple.man] = _vector(f"{where}.q", couple.q, self.n_private)
            Q_obs[couple.man] = _vector(f"{where}.Q", couple.Q, self.n_public)
            if couple.assignable_m is not None:
                assignable_m[couple.man] = _vector(f"{where}.assignable_m", couple.assignable_m, self.n_private)
            if couple.assignable_w is not None:
                assignable_w[couple.man] = _vector(f"{where}.assignable_w", couple.assignable_w, self.n_private)
            flags[couple.man] = couple.committed

        p: Dict[PairKey, np.ndarray] = {}
        P: Dict[PairKey, np.ndarray] = {}
        for i, entry in enumerate(self.prices):
            p[entry.key] = _vector(f"prices.{i}.p", entry.p, self.n_private)
            P[entry.key] = _vector(f"prices.{i}.P", entry.P, self.n_public)
        y = {entry.key: entry.y for entry in self.incomes}

        return Market(
            n_private=self.n_private,
            n_public=self.n_public,
            matching=Matching.from_couples([(c.man, c.woman) for c in self.couples], k, k),
            committed=CommittedSet(tuple(flags)),
            q_obs=q_obs,
            Q_obs=Q_obs,
            p=p,
            P=P,
            y=y,
            assignable_m=assignable_m,
            assignable_w=assignable_w,
        )

    @classmethod
    def from_market(cls, market: Market) -> "MarketFile":
        couples = []
        for m, w in market.couples():
            entry = {
                "man": m,
                "woman": w,
                "committed": market.committed.is_committed(m),
                "q": market.q_obs[m].tolist(),
                "Q": market.Q_obs[m].tolist(),
            }
            if market.has_assignable:
                entry["assignable_m"] = market.assignable_m[m].tolist()
                entry["assignable_w"] = market.assignable_w[m].tolist()
            couples.append(CoupleEntry(**entry))
        keys = sorted(market.p, key=_key_order)
        prices = [PriceEntry(m=_render_partner(k[0]), w=_render_partner(k[1]),
                             p=market.p[k].tolist(), P=market.P[k].tolist()) for k in keys]
        incomes = [IncomeEntry(m=_render_partner(k[0]), w=_render_partner(k[1]), y=market.y[k])
                   for k in sorted(market.y, key=_key_order)]
        return cls(n_private=market.n_private, n_public=market.n_public,
                   couples=couples, prices=prices, incomes=incomes)


def _key_order(key: PairKey):
    m, w = key
    return (m is None, -1 if m is None else m, w is None, -1 if w is None else w)


def _vector(where: str, values: List[float], expected: int) -> np.ndarray:
    if len(values) != expected:
        raise MarketFileError(f"{where}: expected {expected} values, got {len(values)}")
    return np.asarray(values, dtype=float)


def _skip(text: str, pos: int) -> int:
    return WHITESPACE.match(text, pos).end()


def _locate(text: str, loc: Sequence[Union[int, str]]) -> Tuple[int, int]:
    """
    Line and column of the value at a field path in the raw document.

    Walks as deep as the path matches the text: a missing key points at
    the enclosing object, and path parts that are not JSON keys or list
    indices (union member tags) end the walk.
    """
    decoder = json.JSONDecoder()
    pos = _skip(text, 0)
    for part in loc:
        found = None
        if text.startswith("{", pos) and isinstance(part, str):
            cursor = _skip(text, pos + 1)
            while text.startswith('"', cursor):
                key, cursor = scanstring(text, cursor + 1)
                cursor = _skip(text, _skip(text, cursor) + 1)
                if key == part:
                    found = cursor
                    break
                _, cursor = decoder.raw_decode(text, cursor)
                cursor = _skip(text, cursor)
                if text.startswith(",", cursor):
                    cursor = _skip(text, cursor + 1)
        elif text.startswith("[", pos) and isinstance(part, int):
            cursor = _skip(text, pos + 1)
            for index in range(part + 1):
                if text.startswith("]", cursor):
                    break
                if index == part:
                    found = cursor
                    break
                _, cursor = decoder.raw_decode(text, cursor)
                cursor = _skip(text, cursor)
                if text.startswith(",", cursor):
                    cursor = _skip(text, cursor + 1)
        if found is None:
            break
        pos = found
    line = text.count("\n", 0, pos) + 1
    column = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, column


def _path_of(message: str) -> Tuple[Union[int, str], ...]:
    where = message.partition(":")[0]
    return tuple(int(part) if part.isdigit() else part for part in where.split("."))


def parse_market(text: str) -> Market:
    """
    Parse and validate a market document.

    Raises:
        MarketFileError: malformed JSON or schema errors, with the line
            and column of the offending value (and the field path)
        InvalidMarket: the market breaks a dataset invariant
    """
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise MarketFileError(e.msg, e.lineno, e.colno) from e
    try:
        market_file = MarketFile.model_validate(document)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(part) for part in first["loc"]) or "<root>"
        message = f"{where}: {first['msg']} ({e.error_count()} schema errors)"
        raise MarketFileError(message, *_locate(text, first["loc"])) from e
    try:
        market = market_file.to_market()
    except MarketFileError as e:
        if e.line is not None:
            raise
        raise MarketFileError(str(e), *_locate(text, _path_of(str(e)))) from e
    return ensure_valid(market)


def load_market(path: str) -> Market:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise MarketFileError(f"cannot read {path}: {e.strerror}") from e
    return parse_market(text)


def dump_market(market: Market, path: Optional[str] = None) -> str:
    """Serialise a market; writes to path when given and returns the text"""
    text = json.dumps(MarketFile.from_market(market).model_dump(), indent=2, ensure_ascii=False)
    if path is not None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text + "\n", encoding="utf-8")
    return text
