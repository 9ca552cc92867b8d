"""Shared test utilities: in-memory corpora and hand-rolled box builders."""

from __future__ import annotations

import random
import struct

from vidfp import model as vidfp_model
from vidfp import synth
from vidfp.tree import load_exclusion_profile

CONTENT_EXCLUSIONS = load_exclusion_profile("content")


def mkbox(box_type: str, payload: bytes = b"") -> bytes:
    """Independent box builder so parser tests do not lean on synth."""
    return struct.pack(">I", 8 + len(payload)) + box_type.encode("latin-1") + payload


def mkfull(box_type: str, version: int, flags: int, payload: bytes) -> bytes:
    return mkbox(box_type, bytes([version]) + flags.to_bytes(3, "big") + payload)


def corpus_samples(n_classes: int, samples_per_class: int, seed: int = 0,
                   clone_pairs: int = 0, exclusions=CONTENT_EXCLUSIONS,
                   structural_period: int = 3):
    """Build and analyze an in-memory synthetic corpus."""
    if structural_period == 3:
        spec = synth.default_spec(n_classes, samples_per_class, seed, clone_pairs=clone_pairs)
        recipes = spec.classes
    else:
        recipes = tuple(synth.default_class_recipe(i, structural_period=structural_period)
                        for i in range(n_classes))
        spec = synth.SyntheticSpec(classes=recipes, samples_per_class=samples_per_class, seed=seed)
    samples = []
    for class_index, recipe in enumerate(spec.classes):
        for j in range(spec.samples_per_class):
            rng = random.Random((spec.seed * 1_000_003 + class_index) * 1_000_003 + j)
            data = synth.build_file(recipe, rng)
            samples.append(vidfp_model.analyze_source(
                data, exclusions, identifier="%s/%d" % (recipe.name, j), label=recipe.name))
    return samples


def files_for_recipe(recipe, count: int, seed: int = 777):
    rng = random.Random(seed)
    return [synth.build_file(recipe, random.Random(rng.random())) for _ in range(count)]
