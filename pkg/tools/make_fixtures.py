"""Regenerate the bundled hierarchy fixtures.

Each fixture is a transcription of a public dataset taxonomy at the level
sizes the experiments expect; the script asserts those sizes so edits can't
silently drift.  Run from the repo root:

    python tools/make_fixtures.py
"""

from __future__ import annotations

import json
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "src/hierlogic/data/hierarchies"


def emit(name: str, levels: int, nodes: list[dict], expect: tuple[int, ...]):
    """Write one fixture; ``expect`` is the per-level size, root level first."""
    counts = {}
    names = set()
    for n in nodes:
        assert n["name"] not in names, f"duplicate {n['name']}"
        names.add(n["name"])
        counts[n["level"]] = counts.get(n["level"], 0) + 1
    got = tuple(counts[lv] for lv in range(levels, 0, -1))
    assert got == expect, f"{name}: level sizes {got} != {expect}"
    doc = {"name": name, "levels": levels, "nodes": nodes}
    path = OUT / f"{name}.json"
    path.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    print(f"{path.name}: {'/'.join(map(str, expect))} ({len(nodes)} nodes)")


def two_level(groups: dict[str, list[str]]) -> list[dict]:
    nodes = [{"name": g, "level": 2, "parent": None} for g in groups]
    for g, leaves in groups.items():
        nodes += [{"name": leaf, "level": 1, "parent": g} for leaf in leaves]
    return nodes


def three_level(tree: dict[str, dict[str, list[str]]]) -> list[dict]:
    nodes = [{"name": r, "level": 3, "parent": None} for r in tree]
    for r, mids in tree.items():
        for m in mids:
            nodes.append({"name": m, "level": 2, "parent": r})
        for m, leaves in mids.items():
            nodes += [{"name": leaf, "level": 1, "parent": m} for leaf in leaves]
    return nodes


def make_six_node():
    nodes = [
        {"name": "a", "level": 3, "parent": None},
        {"name": "b", "level": 2, "parent": "a"},
        {"name": "c", "level": 2, "parent": "a"},
        {"name": "d", "level": 1, "parent": "b"},
        {"name": "e", "level": 1, "parent": "b"},
        {"name": "f", "level": 1, "parent": "c"},
    ]
    emit("six_node", 3, nodes, (1, 2, 3))


def make_cityscapes():
    groups = {
        "flat": ["road", "sidewalk"],
        "construction": ["building", "wall", "fence"],
        "object": ["pole", "traffic-light", "traffic-sign"],
        "nature": ["vegetation", "terrain", "sky"],
        "human": ["person", "rider"],
        "vehicle": ["car", "truck", "bus", "train", "motorcycle", "bicycle"],
    }
    emit("cityscapes", 2, two_level(groups), (6, 19))


def make_mapillary():
    barrier = [
        "ambiguous", "concrete-block", "curb", "fence", "guard-rail",
        "other-barrier", "road-median", "road-side", "separator", "temporary",
        "wall",
    ]
    flat = [
        "bike-lane", "crosswalk-plain", "curb-cut", "driveway", "parking",
        "parking-aisle", "pedestrian-area", "rail-track", "road",
        "road-shoulder", "service-lane", "sidewalk", "traffic-island",
    ]
    structure = ["bridge", "building", "garage", "tunnel"]
    animal = ["bird", "ground-animal"]
    person = ["individual", "person-group"]
    rider = ["bicyclist", "motorcyclist", "other-rider"]
    ambient = ["mountain", "sand", "sky", "snow", "terrain", "vegetation", "water"]
    marking_ground = [
        "continuous-dashed", "continuous-solid", "continuous-zigzag",
        "discrete-ambiguous", "arrow-left", "arrow-other", "arrow-right",
        "arrow-split-left-or-straight", "arrow-split-right-or-straight",
        "arrow-straight", "crosswalk-zebra", "give-way-row", "give-way-single",
        "hatched-chevron", "hatched-diagonal", "other-marking", "stop-line",
        "symbol-bicycle", "symbol-other", "text",
    ]
    marking_only = [
        "only-continuous-dashed", "only-continuous-solid",
        "only-discrete-crosswalk-zebra", "only-discrete-other",
    ]
    obj_general = [
        "banner", "bench", "bike-rack", "catch-basin", "cctv-camera",
        "fire-hydrant", "junction-box", "mailbox", "manhole", "parking-meter",
        "phone-booth", "pothole", "street-light", "traffic-cone", "trash-can",
        "water-valve",
    ]
    sign = ["advertisement", "sign-ambiguous", "sign-back", "information",
            "sign-other", "store"]
    support = ["pole", "pole-group", "traffic-sign-frame", "utility-pole"]
    traffic_light = [
        "light-general-single", "light-pedestrians", "light-general-upright",
        "light-general-horizontal", "light-cyclists", "light-other",
    ]
    traffic_sign = [
        "sign-ambiguous-front", "sign-back-plate", "direction-back",
        "direction-front", "sign-front", "information-parking",
        "temporary-back", "temporary-front",
    ]
    vehicle = [
        "bicycle", "boat", "bus", "car", "caravan", "motorcycle", "on-rails",
        "other-vehicle", "trailer", "truck", "vehicle-group", "wheeled-slow",
    ]
    void = ["car-mount", "dynamic", "ego-vehicle", "ground", "static",
            "unlabeled"]

    tree = {
        "construction": {
            "construction--barrier": [f"barrier--{x}" for x in barrier],
            "construction--flat": [f"flat--{x}" for x in flat],
            "construction--structure": [f"structure--{x}" for x in structure],
        },
        "nature": {
            "nature--animal": [f"animal--{x}" for x in animal],
            "nature--person": [f"person--{x}" for x in person],
            "nature--rider": [f"rider--{x}" for x in rider],
            "nature--ambient": [f"ambient--{x}" for x in ambient],
        },
        "marking": {
            "marking--ground": [f"marking--{x}" for x in marking_ground],
            "marking--only": [f"marking--{x}" for x in marking_only],
        },
        "object": {
            "object--general": [f"object--{x}" for x in obj_general],
            "object--sign": [f"sign--{x}" for x in sign],
            "object--support": [f"support--{x}" for x in support],
            "object--traffic-light": [f"traffic-light--{x}" for x in traffic_light],
            "object--traffic-sign": [f"traffic-sign--{x}" for x in traffic_sign],
            "object--vehicle": [f"vehicle--{x}" for x in vehicle],
            "object--void": [f"void--{x}" for x in void],
        },
    }
    emit("mapillary_vistas_2", 3, three_level(tree), (4, 16, 124))


def make_pascal_part():
    parts = {
        "aeroplane": ["body", "engine", "stern", "wheel", "wing"],
        "bicycle": ["chainwheel", "handlebar", "headlight", "saddle", "wheel"],
        "bird": ["beak", "eye", "head", "leg", "neck", "tail", "torso", "wing"],
        "boat": ["hull"],
        "bottle": ["body", "cap"],
        "bus": ["backside", "door", "frontside", "leftside", "license-plate",
                "rightside", "roofside", "wheel", "window"],
        "car": ["backside", "door", "frontside", "headlight", "leftside",
                "rightside", "roofside", "wheel", "window"],
        "cat": ["ear", "eye", "head", "leg", "neck", "nose", "tail", "torso"],
        "chair": ["body"],
        "cow": ["ear", "head", "horn", "leg", "muzzle", "tail", "torso"],
        "diningtable": ["top"],
        "dog": ["ear", "eye", "head", "leg", "muzzle", "neck", "nose", "tail",
                "torso"],
        "horse": ["ear", "head", "hoof", "leg", "muzzle", "neck", "tail",
                  "torso"],
        "motorbike": ["handlebar", "headlight", "saddle", "wheel"],
        "person": ["ear", "eye", "eyebrow", "foot", "hair", "hand", "head",
                   "leg", "lower-arm", "mouth", "neck", "nose", "torso",
                   "upper-arm"],
        "pottedplant": ["plant", "pot"],
        "sheep": ["ear", "head", "horn", "leg", "muzzle", "tail", "torso"],
        "sofa": ["body"],
        "train": ["coach", "head", "headlight", "locomotive", "wheel"],
        "tvmonitor": ["frame", "screen"],
    }
    groups = {
        obj: [f"{obj}--{p}" for p in plist] for obj, plist in parts.items()
    }
    total = sum(len(v) for v in groups.values())
    assert total == 108, total
    emit("pascal_part_108", 2, two_level(groups), (20, 108))


def make_ade20k():
    tree = {
        "nature": {
            "water-and-sky": ["sky", "water", "sea", "river", "lake",
                              "waterfall", "swimming-pool"],
            "terrain": ["earth", "mountain", "sand", "hill", "rock", "field",
                        "path", "land", "dirt-track"],
            "vegetation": ["tree", "grass", "plant", "flower", "palm"],
            "living": ["person", "animal"],
        },
        "construction": {
            "building-structure": ["building", "house", "skyscraper", "tower",
                                   "hovel", "grandstand", "booth", "tent",
                                   "bridge", "pier"],
            "surface": ["wall", "floor", "ceiling", "windowpane", "door",
                        "stairs", "stairway", "step", "road", "sidewalk",
                        "runway", "escalator", "fountain", "stage"],
            "barrier-support": ["fence", "railing", "bannister", "column",
                                "pole", "base", "awning", "canopy"],
            "fixture": ["fireplace", "bathtub", "toilet", "sink", "shower",
                        "screen-door"],
        },
        "object": {
            "furniture": ["bed", "cabinet", "table", "chair", "sofa", "shelf",
                          "armchair", "seat", "desk", "wardrobe",
                          "chest-of-drawers", "counter", "bookcase",
                          "coffee-table", "stool", "ottoman", "buffet",
                          "swivel-chair", "kitchen-island", "countertop",
                          "bench", "pool-table", "cradle", "bar"],
            "appliance": ["refrigerator", "stove", "oven", "microwave",
                          "dishwasher", "washer", "fan", "hood", "radiator"],
            "transport": ["car", "bus", "truck", "van", "boat", "ship",
                          "airplane", "bicycle", "minibike"],
            "decor-textile": ["curtain", "painting", "mirror", "rug",
                              "cushion", "pillow", "blind", "towel", "apparel",
                              "poster", "blanket", "sculpture", "vase", "flag",
                              "bag"],
            "electronics-lighting": ["lamp", "light", "chandelier", "sconce",
                                     "streetlight", "traffic-light",
                                     "television", "computer", "monitor",
                                     "screen", "crt-screen", "arcade-machine"],
            "small-item": ["box", "signboard", "case", "book", "bottle",
                           "barrel", "basket", "plaything", "ball", "food",
                           "trade-name", "pot", "plate", "tray", "ashcan",
                           "glass", "clock", "bulletin-board", "tank",
                           "conveyer-belt"],
        },
    }
    emit("ade20k", 3, three_level(tree), (3, 14, 150))


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    make_six_node()
    make_cityscapes()
    make_mapillary()
    make_pascal_part()
    make_ade20k()
