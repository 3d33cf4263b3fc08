"""Checked-in network fixtures: layer geometries, MAC counts, precisions.

Regenerate with scripts/make_fixtures.py; do not edit the JSON by hand.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import List, Optional, Union

from ..errors import ManifestError
from ..precision import LayerProfile
from ..simcore import ConvLayer, FcLayer

NETWORKS = (
    "alexnet",
    "vgg_s",
    "vgg_m",
    "vgg_19",
    "neuraltalk",
    "denoise",
    "nin",
    "googlenet",
)


@dataclass
class NetworkFixture:
    name: str
    width: int
    layers: List[Union[ConvLayer, FcLayer]]
    profiles: dict  # layer name -> LayerProfile
    expectations: Optional[dict] = None

    @property
    def conv_layers(self) -> List[ConvLayer]:
        return [l for l in self.layers if isinstance(l, ConvLayer)]

    @property
    def fc_layers(self) -> List[FcLayer]:
        return [l for l in self.layers if isinstance(l, FcLayer)]


def load_network(name: str) -> NetworkFixture:
    if name not in NETWORKS:
        raise ManifestError(f"unknown network fixture {name!r}; known: {NETWORKS}")
    data = json.loads(resources.files(__package__).joinpath(f"{name}.json").read_text())
    layers = []
    profiles = {}
    for entry in data["layers"]:
        if entry["type"] == "conv":
            layers.append(
                ConvLayer(
                    name=entry["name"],
                    windows=entry["windows"],
                    reduction=entry["reduction"],
                    filters=entry["filters"],
                    macs=entry["macs"],
                )
            )
        else:
            layers.append(
                FcLayer(
                    name=entry["name"],
                    inputs=entry["inputs"],
                    outputs=entry["outputs"],
                    macs=entry["macs"],
                )
            )
        profiles[entry["name"]] = LayerProfile(
            name=entry["name"],
            p_a=entry["p_a"],
            p_w=entry["p_w"],
            n_l=entry.get("n_l", 0),
            work=entry["macs"],
        )
    return NetworkFixture(
        name=data["name"],
        width=data.get("width", 16),
        layers=layers,
        profiles=profiles,
        expectations=data.get("effective_precision_expectations"),
    )
