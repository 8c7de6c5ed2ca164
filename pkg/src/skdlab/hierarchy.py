"""Class/subclass label hierarchies.

A hierarchy groups a flat list of global subclass indices into classes.
Global indices are assigned class-major: all of class 0's subclasses come
first, then class 1's, and so on.  That makes subclass-to-class probability
aggregation a contiguous-range sum.
"""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class LabelHierarchy:
    """Grouping of global subclass indices into classes.

    Parameters
    ----------
    subclasses_per_class : tuple of int
        Number of subclasses under each class, in class order.  Every
        class must have at least one subclass; a class with exactly one
        subclass is simply the class itself.
    """

    subclasses_per_class: tuple[int, ...]
    _offsets: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        spc = tuple(int(n) for n in self.subclasses_per_class)
        if not spc:
            raise ValueError("hierarchy needs at least one class")
        if any(n < 1 for n in spc):
            raise ValueError("every class needs at least one subclass")
        object.__setattr__(self, "subclasses_per_class", spc)
        offsets = [0]
        for n in spc:
            offsets.append(offsets[-1] + n)
        object.__setattr__(self, "_offsets", tuple(offsets))

    @property
    def num_classes(self) -> int:
        return len(self.subclasses_per_class)

    @property
    def total_subclasses(self) -> int:
        return self._offsets[-1]

    @property
    def offsets(self) -> tuple[int, ...]:
        """Cumulative start index of each class's subclass block (len = num_classes + 1)."""
        return self._offsets

    def class_slice(self, class_index: int) -> slice:
        """Slice of global subclass indices belonging to one class."""
        if not 0 <= class_index < self.num_classes:
            raise IndexError(f"class index {class_index} out of range")
        return slice(self._offsets[class_index], self._offsets[class_index + 1])

    def class_of_subclass(self, subclass_index: int) -> int:
        """Class owning a global subclass index."""
        if not 0 <= subclass_index < self.total_subclasses:
            raise IndexError(f"subclass index {subclass_index} out of range")
        for c in range(self.num_classes):
            if subclass_index < self._offsets[c + 1]:
                return c
        raise AssertionError("unreachable")

    def subclass_to_class(self) -> dict[int, int]:
        """Full global-subclass -> class map."""
        return {j: self.class_of_subclass(j) for j in range(self.total_subclasses)}


# Task presets.  Two classes throughout; class 0 plays the minority
# (positive/lesion) role and class 1 the majority role.  The name encodes
# how many subclasses each class is split into.
TASK_PRESETS: dict[str, tuple[int, ...]] = {
    "ClassLevel": (1, 1),
    "SL21": (2, 1),
    "SL22": (2, 2),
    "SL12": (1, 2),
}


def build_task_preset(name: str) -> LabelHierarchy:
    """Look up one of the named two-class task hierarchies."""
    try:
        spc = TASK_PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(TASK_PRESETS))
        raise ValueError(f"unknown task preset {name!r} (known: {known})") from None
    return LabelHierarchy(spc)
