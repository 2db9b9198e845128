"""Built-in example fields."""

from __future__ import annotations

from dataclasses import dataclass

from .expr import VectorFieldSpec


@dataclass(frozen=True)
class Example:
    name: str
    components: tuple[str, str, str]
    normalize: bool
    description: str
    theta: str | None = None  # closed-form angle profile, for normal-form fields

    def spec(self) -> VectorFieldSpec:
        return VectorFieldSpec.from_strings(*self.components, normalize=self.normalize, name=self.name)


_GALLERY = (
    Example("constant", ("1", "0", "0"), False, "parallel lines; integrable plane field, not contact"),
    Example("theta-linear", ("cos(z)", "-sin(z)", "0"), False, "normal form with t(z) = z", theta="z"),
    Example(
        "theta-cubic",
        ("cos(z+z^3/3)", "-sin(z+z^3/3)", "0"),
        False,
        "normal form with t(z) = z + z^3/3",
        theta="z+z^3/3",
    ),
    Example(
        "theta-sine",
        ("cos(sin(z))", "-sin(sin(z))", "0"),
        False,
        "normal form with t(z) = sin z; contact fails where cos z = 0",
        theta="sin(z)",
    ),
    Example("skew-hopf", ("z*x-y", "x+z*y", "1+z^2"), True, "skew line fibration, dV of rank 2 everywhere"),
    Example("helix-not-straight", ("-y", "x", "1"), True, "integral curves are helices; not a line fibration"),
)


def example_gallery() -> dict[str, Example]:
    return {ex.name: ex for ex in _GALLERY}


def get_example(name: str) -> Example:
    gallery = example_gallery()
    if name not in gallery:
        raise KeyError(f"unknown example {name!r}; choose from {', '.join(gallery)}")
    return gallery[name]
