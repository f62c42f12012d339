from typing import List, Set

from ..catalog.dataset import Dataset
from ..models.schema import CarouselSpec, Item


def _event_values(spec: CarouselSpec) -> Set[str]:
    return set(spec.match_values) or {spec.constraint}


def matches_constraint(item: Item, spec: CarouselSpec) -> bool:
    if spec.kind == "genre":
        return spec.constraint in item.genres
    if spec.kind == "genre_combination":
        return spec.constraint <= item.genres
    if spec.kind == "subject":
        return spec.constraint in item.subjects
    if spec.kind == "author":
        return item.main_author is not None and item.main_author == spec.constraint
    if spec.kind == "cyclic_event":
        if spec.match_field is None:
            return bool(_event_values(spec) & (item.genres | item.subjects))
        return bool(_event_values(spec) & getattr(item, spec.match_field))
    return False


def matching_items(spec: CarouselSpec, ds: Dataset) -> List[str]:
    """Sorted ids of every catalog item satisfying the carousel constraint, via the dataset's inverted indexes"""
    if spec.kind == "genre":
        found = ds.items_by_genre.get(spec.constraint, set())
    elif spec.kind == "genre_combination":
        sets = [ds.items_by_genre.get(g, set()) for g in spec.constraint]
        found = set.intersection(*sets) if sets else set()
    elif spec.kind == "subject":
        found = ds.items_by_subject.get(spec.constraint, set())
    elif spec.kind == "author":
        found = ds.items_by_author.get(spec.constraint, set())
    else:
        fields = [spec.match_field] if spec.match_field else ["genres", "subjects"]
        found = set()
        for field in fields:
            index = ds.items_by_genre if field == "genres" else ds.items_by_subject
            for value in _event_values(spec):
                found |= index.get(value, set())
    return sorted(found)
