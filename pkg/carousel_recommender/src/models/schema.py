import re
from datetime import date, datetime, timezone
from typing import Any, Dict, FrozenSet, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

CarouselKind = Literal["genre", "genre_combination", "subject", "author", "cyclic_event"]
Provenance = Literal["from_predictions", "from_history", "global"]
SourceTag = Literal["predicted", "topup", "diversity", "serendipity", "novelty"]
StrategyName = Literal["original", "diversity", "serendipity", "novelty", "combined"]

STRATEGY_NAMES = ("original", "diversity", "serendipity", "novelty", "combined")

_WHITESPACE = re.compile(r"\s+")


def normalize_author(value: Optional[str]) -> Optional[str]:
    """Case-folded, whitespace-collapsed author key; blank means missing"""
    if value is None:
        return None
    key = _WHITESPACE.sub(" ", str(value)).strip().casefold()
    return key or None


def _blank_to_none(value: Any) -> Any:
    if isinstance(value, str) and not value.strip():
        return None
    return value


def _as_code_set(value: Any) -> FrozenSet[str]:
    if value is None:
        return frozenset()
    if isinstance(value, str):
        value = value.split(";")
    return frozenset(str(v).strip() for v in value if str(v).strip())


class Item(BaseModel):
    """Catalog record; None marks a missing attribute"""

    model_config = ConfigDict(frozen=True, extra="ignore")

    item_id: str
    title: str = ""
    main_author: Optional[str] = None
    genres: FrozenSet[str] = Field(default_factory=frozenset)
    subjects: FrozenSet[str] = Field(default_factory=frozenset)
    age_category: Optional[str] = None
    medium_type: Optional[str] = None
    fiction: Optional[bool] = None
    added_date: Optional[date] = None
    first_published_year: Optional[int] = None

    @field_validator("item_id", mode="before")
    @classmethod
    def require_item_id(cls, v):
        if v is None or not str(v).strip():
            raise ValueError("item_id is empty")
        return str(v).strip()

    @field_validator("main_author", mode="before")
    @classmethod
    def author_key(cls, v):
        return normalize_author(v)

    @field_validator("genres", "subjects", mode="before")
    @classmethod
    def code_sets(cls, v):
        return _as_code_set(v)

    @field_validator("age_category", "medium_type", "added_date", "first_published_year", mode="before")
    @classmethod
    def blanks_are_missing(cls, v):
        return _blank_to_none(v)

    @field_validator("fiction", mode="before")
    @classmethod
    def parse_fiction(cls, v):
        v = _blank_to_none(v)
        if isinstance(v, str):
            lowered = v.strip().lower()
            if lowered not in {"true", "false"}:
                raise ValueError(f"fiction must be true, false or empty, got {v!r}")
            return lowered == "true"
        return v

    @field_serializer("genres", "subjects")
    def sorted_codes(self, v: FrozenSet[str]) -> List[str]:
        return sorted(v)


class Transaction(BaseModel):
    model_config = ConfigDict(frozen=True)

    user_id: str
    item_id: str
    timestamp: datetime

    @field_validator("user_id", "item_id", mode="before")
    @classmethod
    def as_text(cls, v):
        if v is None or not str(v).strip():
            raise ValueError("identifier is empty")
        return str(v).strip()

    @field_validator("timestamp")
    @classmethod
    def naive_seconds(cls, v: datetime) -> datetime:
        if v.tzinfo is not None:
            v = v.astimezone(timezone.utc).replace(tzinfo=None)
        return v.replace(microsecond=0)

    def sort_key(self):
        return (self.user_id, self.timestamp, self.item_id)


class LoadIssue(BaseModel):
    row: int
    reason: str


class LoadReport(BaseModel):
    """Row-level problems collected while reading one input file"""

    source: str
    loaded: int = 0
    dropped: int = 0
    issues: List[LoadIssue] = Field(default_factory=list)

    def add(self, row: int, reason: str) -> None:
        self.issues.append(LoadIssue(row=row, reason=reason))
        self.dropped += 1


class BisWeights(BaseModel):
    """Attribute weights of the basic item similarity; denominator is their sum"""

    model_config = ConfigDict(frozen=True)

    author: float = Field(default=1.0, ge=0.0)
    genre: float = Field(default=2.0, ge=0.0)
    subject: float = Field(default=1.0, ge=0.0)
    age_category: float = Field(default=2.0, ge=0.0)
    medium_type: float = Field(default=1.0, ge=0.0)
    fiction: float = Field(default=1.0, ge=0.0)
    denominator: Optional[float] = None

    @model_validator(mode="before")
    @classmethod
    def fill_denominator(cls, data):
        if isinstance(data, dict) and data.get("denominator") is None:
            data = dict(data)
            defaults = {name: cls.model_fields[name].default for name in cls.weight_names()}
            data["denominator"] = sum(float(data.get(name, defaults[name])) for name in cls.weight_names())
        return data

    @model_validator(mode="after")
    def check_denominator(self):
        total = sum(getattr(self, name) for name in self.weight_names())
        if total <= 0:
            raise ValueError("at least one BIS weight must be positive")
        if abs(self.denominator - total) > 1e-9 * max(1.0, total):
            raise ValueError(f"denominator {self.denominator} must equal the sum of weights {total}")
        return self

    @staticmethod
    def weight_names():
        return ("author", "genre", "subject", "age_category", "medium_type", "fiction")

    def scaled(self, factor: float) -> "BisWeights":
        return BisWeights(
            author=self.author * factor,
            genre=self.genre * factor,
            subject=self.subject * factor,
            age_category=self.age_category * factor,
            medium_type=self.medium_type * factor,
            fiction=self.fiction * factor,
        )


class PredictionEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    item_id: str
    score: float = Field(allow_inf_nan=False)


class PredictionList(BaseModel):
    """Ranked predictions for one user; scores never increase down the list"""

    user_id: str
    entries: List[PredictionEntry] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_order(self):
        seen = set()
        previous = None
        for entry in self.entries:
            if entry.item_id in seen:
                raise ValueError(f"duplicate item {entry.item_id} in predictions for {self.user_id}")
            seen.add(entry.item_id)
            if previous is not None and entry.score > previous:
                raise ValueError(f"scores increase at item {entry.item_id} for {self.user_id}")
            previous = entry.score
        return self

    def item_ids(self) -> List[str]:
        return [e.item_id for e in self.entries]


class CarouselSpec(BaseModel):
    """A typed carousel constraint and where it was derived from"""

    model_config = ConfigDict(frozen=True)

    kind: CarouselKind
    constraint: Union[FrozenSet[str], str]
    provenance: Provenance
    match_field: Optional[Literal["genres", "subjects"]] = None
    match_values: FrozenSet[str] = Field(default_factory=frozenset)

    @field_validator("constraint", mode="before")
    @classmethod
    def coerce_constraint(cls, v):
        if isinstance(v, (list, tuple, set)):
            return frozenset(str(x) for x in v)
        return v

    @model_validator(mode="after")
    def constraint_matches_kind(self):
        if self.kind == "genre_combination":
            if not isinstance(self.constraint, frozenset) or len(self.constraint) < 2:
                raise ValueError("genre_combination needs a set of at least two genres")
        elif not isinstance(self.constraint, str) or not self.constraint:
            raise ValueError(f"{self.kind} constraint must be a single non-empty code")
        return self

    @field_serializer("constraint")
    def serialize_constraint(self, v):
        if isinstance(v, frozenset):
            return sorted(v)
        return v

    @field_serializer("match_values")
    def serialize_match_values(self, v):
        return sorted(v)

    def label(self) -> str:
        if isinstance(self.constraint, frozenset):
            return "+".join(sorted(self.constraint))
        return self.constraint

    def key(self) -> str:
        return f"{self.kind}:{self.label()}"


class FilledCarousel(BaseModel):
    user_id: str
    spec: CarouselSpec
    items: List[str] = Field(default_factory=list)
    sources: List[SourceTag] = Field(default_factory=list)

    @model_validator(mode="after")
    def parallel_lists(self):
        if len(self.items) != len(self.sources):
            raise ValueError("items and sources must have equal length")
        if len(set(self.items)) != len(self.items):
            raise ValueError(f"duplicate items in carousel {self.spec.key()}")
        return self

    def to_record(self) -> Dict[str, Any]:
        record = {
            "user_id": self.user_id,
            "kind": self.spec.kind,
            "constraint": self.spec.model_dump(mode="json")["constraint"],
            "provenance": self.spec.provenance,
        }
        if self.spec.match_field is not None or self.spec.match_values:
            record["match_field"] = self.spec.match_field
            record["match_values"] = sorted(self.spec.match_values)
        record["items"] = [{"item_id": i, "source": s} for i, s in zip(self.items, self.sources)]
        return record

    @classmethod
    def from_record(cls, record: Dict[str, Any]) -> "FilledCarousel":
        spec = CarouselSpec(
            kind=record["kind"],
            constraint=record["constraint"],
            provenance=record["provenance"],
            match_field=record.get("match_field"),
            match_values=frozenset(record.get("match_values") or ()),
        )
        return cls(
            user_id=str(record["user_id"]),
            spec=spec,
            items=[e["item_id"] for e in record.get("items", [])],
            sources=[e["source"] for e in record.get("items", [])],
        )


class StrategyParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    carousel_size: int = Field(default=15, ge=1)
    predicted_take: int = Field(default=10, ge=0)
    combined_predicted_take: int = Field(default=9, ge=0)
    candidate_pool_size: int = Field(default=100, ge=0)
    recency_window: int = Field(default=200, ge=1)
    novelty_cutoff_date: date = date(2023, 1, 1)
    seed: int = 0
    weights: BisWeights = Field(default_factory=BisWeights)

    @model_validator(mode="after")
    def check_slots(self):
        if self.predicted_take > self.carousel_size:
            raise ValueError("predicted_take must not exceed carousel_size")
        if self.candidate_pool_size < self.carousel_size - self.predicted_take:
            raise ValueError("candidate_pool_size must cover the slots left after predicted items")
        return self


class EventWindow(BaseModel):
    """Recurring calendar range (MM-DD, inclusive, may wrap the new year) mapped to a content filter"""

    model_config = ConfigDict(frozen=True)

    start_date: str
    end_date: str
    tag: str
    match_field: Literal["genres", "subjects"] = "genres"
    match_values: FrozenSet[str] = Field(default_factory=frozenset)

    @field_validator("start_date", "end_date")
    @classmethod
    def month_day(cls, v: str) -> str:
        if not re.fullmatch(r"\d{2}-\d{2}", v):
            raise ValueError(f"expected MM-DD, got {v!r}")
        month, day = (int(p) for p in v.split("-"))
        date(2000, month, day)
        return v

    @field_validator("match_values", mode="before")
    @classmethod
    def values(cls, v):
        return _as_code_set(v)

    def contains(self, when: date) -> bool:
        today = when.strftime("%m-%d")
        if self.start_date <= self.end_date:
            return self.start_date <= today <= self.end_date
        return today >= self.start_date or today <= self.end_date

    def to_spec(self) -> CarouselSpec:
        return CarouselSpec(
            kind="cyclic_event",
            constraint=self.tag,
            provenance="global",
            match_field=self.match_field,
            match_values=self.match_values or frozenset({self.tag}),
        )


class RelevanceJudgment(BaseModel):
    ranked_items: List[str] = Field(default_factory=list)
    relevant: FrozenSet[str] = Field(default_factory=frozenset)

    @field_validator("ranked_items")
    @classmethod
    def distinct(cls, v):
        if len(set(v)) != len(v):
            raise ValueError("ranked_items contains duplicates")
        return v


class BoxplotSummary(BaseModel):
    median: float
    lower_quartile: float
    upper_quartile: float
    lower_whisker: float
    upper_whisker: float
    n: int

    @model_validator(mode="after")
    def ordered(self):
        chain = [self.lower_whisker, self.lower_quartile, self.median, self.upper_quartile, self.upper_whisker]
        if any(a > b + 1e-12 for a, b in zip(chain, chain[1:])):
            raise ValueError(f"boxplot statistics out of order: {chain}")
        return self


class CarouselMeasurement(BaseModel):
    user_id: str
    strategy: str
    kind: str
    constraint: str
    n_items: int
    internal_similarity: Optional[float] = None
    transactions_similarity: Optional[float] = None
    novelty_pct: Optional[float] = None


class StrategySummary(BaseModel):
    carousel_count: int
    measured_count: int
    internal_similarity: Optional[BoxplotSummary] = None
    transactions_similarity: Optional[BoxplotSummary] = None
    novelty_pct: Optional[BoxplotSummary] = None
    internal_similarity_by_kind: Dict[str, BoxplotSummary] = Field(default_factory=dict)
    catalog_coverage: float = 0.0
    relative_change: Dict[str, float] = Field(default_factory=dict)


class AccuracyRow(BaseModel):
    k: int
    precision: float
    recall: float
    hit_rate: float
    map: float
    ndcg: float
    abis: Optional[float] = None
    abis_users: int = 0
    abis_skipped: int = 0


class ExperimentReport(BaseModel):
    n_test_users: int
    seed: int
    strategies: Dict[str, StrategySummary]
    accuracy: Dict[str, List[AccuracyRow]]
    config: Dict[str, Any] = Field(default_factory=dict)


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    strategies: List[StrategyName] = Field(default_factory=lambda: list(STRATEGY_NAMES))
    k_values: List[int] = Field(default_factory=lambda: [10, 25, 50, 100, 250])
    n_test_users: int = Field(default=100, ge=0)
    holdout: int = Field(default=5, ge=1)
    seed: int = 42
    recency_window: int = Field(default=200, ge=1)
    novelty_cutoff: Optional[date] = None
    novelty_window_days: int = Field(default=365, ge=0)
    evaluation_date: Optional[date] = None
    pool_size: int = Field(default=100, ge=0)
    carousel_size: int = Field(default=15, ge=1)
    predicted_take: int = Field(default=10, ge=0)
    combined_predicted_take: int = Field(default=9, ge=0)
    prediction_depth: int = Field(default=250, ge=1)
    provider: str = "cooccurrence"
    compare_random: bool = True
    exclude_diagonal: bool = False
    weights: BisWeights = Field(default_factory=BisWeights)
    events: List[EventWindow] = Field(default_factory=list)
    workers: int = Field(default=1, ge=1)

    @field_validator("strategies")
    @classmethod
    def non_empty_strategies(cls, v):
        if not v:
            raise ValueError("at least one strategy is required")
        return list(dict.fromkeys(v))

    @field_validator("k_values")
    @classmethod
    def positive_ks(cls, v):
        if not v:
            raise ValueError("at least one K value is required")
        if any(k < 1 for k in v):
            raise ValueError("K values must be >= 1")
        return sorted(set(v))

    @model_validator(mode="after")
    def slots_fit(self):
        if self.predicted_take > self.carousel_size or self.combined_predicted_take > self.carousel_size:
            raise ValueError("predicted takes must not exceed carousel_size")
        return self


class RunManifest(BaseModel):
    command: str
    tool_version: str
    seed: Optional[int] = None
    config: Dict[str, Any] = Field(default_factory=dict)
    input_digests: Dict[str, str] = Field(default_factory=dict)
    output_digests: Dict[str, str] = Field(default_factory=dict)
    started_at: datetime
    finished_at: Optional[datetime] = None
