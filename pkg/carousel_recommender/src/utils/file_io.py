"""Readers and writers for every on-disk format the pipeline uses"""
import json
import math
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple

import pandas as pd
from pydantic import ValidationError

from ..catalog.dataset import Dataset
from ..models.errors import DataError
from ..models.schema import CarouselMeasurement, FilledCarousel, Item, LoadReport, PredictionList, Transaction

logger = logging.getLogger(__name__)

ITEM_COLUMNS = [
    "item_id",
    "title",
    "main_author",
    "genres",
    "subjects",
    "age_category",
    "medium_type",
    "fiction",
    "added_date",
    "first_published_year",
]
TRANSACTION_COLUMNS = ["user_id", "item_id", "timestamp"]
PREDICTION_COLUMNS = ["user_id", "item_id", "score"]
MEASUREMENT_COLUMNS = [
    "user_id",
    "strategy",
    "kind",
    "constraint",
    "n_items",
    "internal_similarity",
    "transactions_similarity",
    "novelty_pct",
]

# data rows start on line 2, after the header
_FIRST_CSV_ROW = 2


def _read_table(path: Path) -> pd.DataFrame:
    """Read a delimited file as text cells; an empty file is an empty frame"""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"input file not found: {path}")
    try:
        return pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        return pd.DataFrame()


def _validation_reason(exc: ValidationError) -> str:
    return "; ".join(f"{'.'.join(str(p) for p in e['loc']) or 'row'}: {e['msg']}" for e in exc.errors())


def _item_rows(path: Path, fmt: str) -> Iterable[Tuple[int, Dict[str, Any]]]:
    if fmt == "csv":
        frame = _read_table(path)
        if "item_id" not in frame.columns:
            raise DataError(f"{path}: required column 'item_id' is missing")
        for offset, record in enumerate(frame.to_dict(orient="records")):
            yield offset + _FIRST_CSV_ROW, record
    elif fmt == "jsonl":
        if not Path(path).exists():
            raise FileNotFoundError(f"input file not found: {path}")
        with open(path, "r", encoding="utf-8") as f:
            for line_no, line in enumerate(f, 1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as e:
                    yield line_no, {"__error__": f"invalid JSON: {e.msg}"}
                    continue
                yield line_no, record if isinstance(record, dict) else {"__error__": "record is not an object"}
    else:
        raise DataError(f"unsupported items format {fmt!r}; expected csv or jsonl")


def load_items(path: Path, fmt: Optional[str] = None) -> Tuple[Dict[str, Item], LoadReport]:
    """Load a catalog; malformed rows go to the report, duplicate ids abort"""
    path = Path(path)
    fmt = fmt or ("jsonl" if path.suffix.lower() in {".jsonl", ".ndjson"} else "csv")
    report = LoadReport(source=str(path))
    items: Dict[str, Item] = {}

    for row, record in _item_rows(path, fmt):
        if "__error__" in record:
            report.add(row, record["__error__"])
            continue
        try:
            item = Item(**record)
        except ValidationError as e:
            report.add(row, _validation_reason(e))
            continue
        if item.item_id in items:
            raise DataError(f"duplicate item_id {item.item_id!r} at row {row}")
        items[item.item_id] = item

    report.loaded = len(items)
    if report.dropped:
        logger.warning("Dropped %d malformed item rows from %s", report.dropped, path)
    logger.info("Loaded %d items from %s", len(items), path)
    return items, report


def load_transactions(path: Path, catalog: Mapping[str, Item]) -> Tuple[List[Transaction], LoadReport]:
    """Load checkouts sorted by (user_id, timestamp, item_id); unknown items are dropped"""
    frame = _read_table(path)
    report = LoadReport(source=str(path))
    if frame.empty:
        logger.info("No transactions in %s", path)
        return [], report

    missing = [c for c in TRANSACTION_COLUMNS if c not in frame.columns]
    if missing:
        raise DataError(f"{path}: required columns missing: {', '.join(missing)}")

    transactions: List[Transaction] = []
    for offset, record in enumerate(frame[TRANSACTION_COLUMNS].to_dict(orient="records")):
        row = offset + _FIRST_CSV_ROW
        try:
            tx = Transaction(**record)
        except ValidationError as e:
            report.add(row, _validation_reason(e))
            continue
        if tx.item_id not in catalog:
            report.add(row, f"unknown item {tx.item_id!r}")
            continue
        transactions.append(tx)

    transactions.sort(key=Transaction.sort_key)
    report.loaded = len(transactions)
    if report.dropped:
        logger.warning("Dropped %d transaction rows from %s", report.dropped, path)
    logger.info("Loaded %d transactions from %s", len(transactions), path)
    return transactions, report


def _item_record(item: Item) -> Dict[str, str]:
    return {
        "item_id": item.item_id,
        "title": item.title,
        "main_author": item.main_author or "",
        "genres": ";".join(sorted(item.genres)),
        "subjects": ";".join(sorted(item.subjects)),
        "age_category": item.age_category or "",
        "medium_type": item.medium_type or "",
        "fiction": "" if item.fiction is None else str(item.fiction).lower(),
        "added_date": item.added_date.isoformat() if item.added_date else "",
        "first_published_year": "" if item.first_published_year is None else str(item.first_published_year),
    }


def write_items(items: Iterable[Item], path: Path) -> None:
    records = [_item_record(i) for i in sorted(items, key=lambda i: i.item_id)]
    pd.DataFrame(records, columns=ITEM_COLUMNS).to_csv(path, index=False, lineterminator="\n")


def write_transactions(transactions: Iterable[Transaction], path: Path) -> None:
    records = [
        {"user_id": tx.user_id, "item_id": tx.item_id, "timestamp": tx.timestamp.isoformat(timespec="seconds")}
        for tx in sorted(transactions, key=Transaction.sort_key)
    ]
    pd.DataFrame(records, columns=TRANSACTION_COLUMNS).to_csv(path, index=False, lineterminator="\n")


def write_load_report(reports: Iterable[LoadReport], path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for report in reports:
            for issue in report.issues:
                f.write(json.dumps({"source": report.source, "row": issue.row, "reason": issue.reason}) + "\n")


def read_prediction_rows(path: Path) -> Tuple[List[Tuple[int, str, str, float]], LoadReport]:
    """Raw (row, user_id, item_id, score) tuples; unparseable or non-finite scores go to the report"""
    frame = _read_table(path)
    report = LoadReport(source=str(path))
    if frame.empty:
        return [], report
    missing = [c for c in PREDICTION_COLUMNS if c not in frame.columns]
    if missing:
        raise DataError(f"{path}: required columns missing: {', '.join(missing)}")

    rows = []
    for offset, record in enumerate(frame[PREDICTION_COLUMNS].to_dict(orient="records")):
        row = offset + _FIRST_CSV_ROW
        user_id, item_id = record["user_id"].strip(), record["item_id"].strip()
        if not user_id or not item_id:
            report.add(row, "empty user_id or item_id")
            continue
        try:
            score = float(record["score"])
        except ValueError:
            report.add(row, f"unparseable score {record['score']!r}")
            continue
        if not math.isfinite(score):
            report.add(row, f"non-finite score {record['score']!r}")
            continue
        rows.append((row, user_id, item_id, score))
    return rows, report


def write_predictions(predictions: Iterable[PredictionList], path: Path) -> int:
    records = [
        {"user_id": p.user_id, "item_id": e.item_id, "score": e.score}
        for p in sorted(predictions, key=lambda p: p.user_id)
        for e in p.entries
    ]
    pd.DataFrame(records, columns=PREDICTION_COLUMNS).to_csv(
        path, index=False, lineterminator="\n"
    )
    return len(records)


def write_carousels(carousels: Iterable[FilledCarousel], path: Path) -> int:
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for carousel in carousels:
            f.write(json.dumps(carousel.to_record()) + "\n")
            count += 1
    return count


def read_carousels(path: Path) -> List[FilledCarousel]:
    with open(path, "r", encoding="utf-8") as f:
        return [FilledCarousel.from_record(json.loads(line)) for line in f if line.strip()]


def write_measurements(rows: Iterable[CarouselMeasurement], path: Path) -> None:
    frame = pd.DataFrame([r.model_dump() for r in rows], columns=MEASUREMENT_COLUMNS)
    frame.to_csv(path, index=False, lineterminator="\n")


def read_measurements(path: Path) -> List[CarouselMeasurement]:
    frame = pd.read_csv(
        path, dtype={"user_id": str, "constraint": str}, keep_default_na=True, float_precision="round_trip"
    )
    frame = frame.astype(object).where(frame.notna(), None)
    return [CarouselMeasurement(**record) for record in frame.to_dict(orient="records")]


def write_json(payload: Any, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(payload, f, indent=2)
        f.write("\n")


def read_json(path: Path) -> Any:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


ITEMS_FILE = "items.csv"
TRANSACTIONS_FILE = "transactions.csv"
LOAD_REPORT_FILE = "load_report.jsonl"
MANIFEST_FILE = "manifest.json"


def save_dataset(ds: Dataset, out_dir: Path) -> List[Path]:
    """Write the dataset archive (catalog + transactions) and return the written paths"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_items(ds.items.values(), out_dir / ITEMS_FILE)
    write_transactions(ds.transactions, out_dir / TRANSACTIONS_FILE)
    return [out_dir / ITEMS_FILE, out_dir / TRANSACTIONS_FILE]


def load_dataset(archive: Path) -> Dataset:
    """Read a dataset archive written by save_dataset"""
    archive = Path(archive)
    if not archive.is_dir():
        raise FileNotFoundError(f"dataset archive not found: {archive}")
    items, item_report = load_items(archive / ITEMS_FILE)
    transactions, tx_report = load_transactions(archive / TRANSACTIONS_FILE, items)
    if item_report.dropped or tx_report.dropped:
        raise DataError(f"dataset archive {archive} has invalid rows; re-run ingest")
    return Dataset(items, transactions)
