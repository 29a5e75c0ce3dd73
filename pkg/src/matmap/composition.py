"""Per-class material compositions.

Each detectable object class carries a vector of masses (kg), one entry per
monitored material. Classes that only declare some of the monitored
materials are zero-padded against the registry's material list.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field, replace

from .errors import RegistryError


@dataclass(frozen=True)
class Material:
    id: int
    name: str


@dataclass(frozen=True)
class ObjectClass:
    id: int
    name: str


def _check_dense(items: Iterable[Material | ObjectClass], what: str) -> None:
    items = list(items)
    ids = [it.id for it in items]
    if ids != list(range(1, len(items) + 1)):
        raise RegistryError(f"{what} ids must be 1..{len(items)} in order, got {ids}")
    names = [it.name for it in items]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise RegistryError(f"duplicate {what} names: {', '.join(dupes)}")


def _check_mass(value: float, where: str) -> float:
    if isinstance(value, bool):
        raise RegistryError(f"{where}: mass must be a number, got {value!r}")
    try:
        mass = float(value)
    except (TypeError, ValueError):
        raise RegistryError(f"{where}: mass must be a number, got {value!r}") from None
    if not math.isfinite(mass):
        raise RegistryError(f"{where}: mass must be finite, got {value!r}")
    if mass < 0:
        raise RegistryError(f"{where}: mass must be non-negative, got {value!r}")
    return mass


@dataclass(frozen=True)
class CompositionRegistry:
    """Materials, object classes and one aligned mass vector per class.

    Instances are immutable; :meth:`register_class` returns a new registry.
    """

    materials: tuple[Material, ...]
    classes: tuple[ObjectClass, ...] = ()
    compositions: Mapping[int, tuple[float, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        _check_dense(self.materials, "material")
        _check_dense(self.classes, "class")
        if set(self.compositions) != {c.id for c in self.classes}:
            raise RegistryError("every class needs exactly one composition")
        for c, vec in self.compositions.items():
            if len(vec) != self.psi:
                raise RegistryError(f"class {c}: composition has {len(vec)} entries, expected {self.psi}")

    @classmethod
    def from_names(cls, materials: Iterable[str]) -> CompositionRegistry:
        return cls(tuple(Material(i, n) for i, n in enumerate(materials, start=1)))

    @property
    def psi(self) -> int:
        return len(self.materials)

    @property
    def q(self) -> int:
        return len(self.classes)

    def material_id(self, ref: int | str) -> int:
        """Resolve a material id or name to its id."""
        for m in self.materials:
            if ref == m.name or (not isinstance(ref, (str, bool)) and ref == m.id):
                return m.id
        raise RegistryError(f"unknown material {ref!r}")

    def class_id(self, ref: int | str) -> int:
        for c in self.classes:
            if ref == c.name or (not isinstance(ref, (str, bool)) and ref == c.id):
                return c.id
        raise RegistryError(f"unknown class {ref!r}")

    def register_class(
        self,
        c: ObjectClass | str,
        masses: Iterable[float] | Mapping[int | str, float],
    ) -> CompositionRegistry:
        """Add a class and its composition.

        ``masses`` is either a full-length positional sequence (one entry per
        material, in id order) or a mapping / iterable of ``(material, kg)``
        pairs where ``material`` is an id or a name. Materials left out of
        the pairs form get 0 kg.
        """
        if isinstance(c, str):
            c = ObjectClass(self.q + 1, c)
        if any(existing.id == c.id or existing.name == c.name for existing in self.classes):
            raise RegistryError(f"class {c.id} ({c.name!r}) is already registered")
        if c.id != self.q + 1:
            raise RegistryError(f"next class id must be {self.q + 1}, got {c.id}")
        aligned = self._align(c, masses)
        comps = dict(self.compositions)
        comps[c.id] = aligned
        return replace(self, classes=self.classes + (c,), compositions=comps)

    def _align(self, c: ObjectClass, masses) -> tuple[float, ...]:
        where = f"class {c.name!r}"
        if isinstance(masses, Mapping):
            pairs = list(masses.items())
        else:
            masses = list(masses)
            if masses and all(isinstance(m, tuple) and len(m) == 2 for m in masses):
                pairs = masses
            else:
                if len(masses) != self.psi:
                    raise RegistryError(
                        f"{where}: positional masses need exactly {self.psi} entries, "
                        f"got {len(masses)}"
                    )
                return tuple(
                    _check_mass(m, f"{where}, material {j}") for j, m in enumerate(masses, 1)
                )
        out = [0.0] * self.psi
        seen: set[int] = set()
        for ref, value in pairs:
            j = self.material_id(ref)
            if j in seen:
                raise RegistryError(f"{where}: material {ref!r} given twice")
            seen.add(j)
            out[j - 1] = _check_mass(value, f"{where}, material {ref!r}")
        return tuple(out)

    def mass_vector(self, c: int) -> tuple[float, ...]:
        try:
            return self.compositions[c]
        except KeyError:
            raise RegistryError(f"class {c!r} is not registered") from None

    def class_mass(self, c: int, j: int) -> float:
        """Mass (kg) of material ``j`` in one object of class ``c``."""
        vec = self.mass_vector(c)
        if not isinstance(j, int) or not 1 <= j <= self.psi:
            raise RegistryError(f"material {j!r} is not registered")
        return vec[j - 1]

    def scaled(self, alpha: float) -> CompositionRegistry:
        """Registry with every mass multiplied by ``alpha`` (>= 0)."""
        if alpha < 0:
            raise RegistryError("scale factor must be non-negative")
        comps = {c: tuple(alpha * m for m in vec) for c, vec in self.compositions.items()}
        return replace(self, compositions=comps)
