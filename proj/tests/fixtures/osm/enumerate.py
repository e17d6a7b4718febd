#!/usr/bin/env python3
"""Walks crossing.osm element by element and writes the expected road graph.

Independent of the C++ parser: xml.etree for the document, a local haversine
for lengths. Output matches the road CSV schema.
"""
import math
import sys
import xml.etree.ElementTree as ET
from pathlib import Path

EARTH_RADIUS_M = 6371008.8
KM_PER_MILE = 1.609344


def haversine(lon1, lat1, lon2, lat2):
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = math.radians(lat2 - lat1)
    dl = math.radians(lon2 - lon1)
    a = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return EARTH_RADIUS_M * 2 * math.asin(math.sqrt(min(1.0, a)))


def maxspeed(v):
    v = v.strip()
    if v.endswith("mph"):
        return float(v[:-3]) * KM_PER_MILE
    try:
        return float(v)
    except ValueError:
        return None


def lanes(v):
    return max(int(x) for x in v.split(";"))


def fmt(x):
    return repr(float(x)) if x is not None else ""


def main(src, out_dir):
    root = ET.parse(src).getroot()
    nodes = {}
    for n in root.iter("node"):
        nodes[int(n.get("id"))] = (float(n.get("lon")), float(n.get("lat")))
    used = set()
    edges = []
    for w in root.iter("way"):
        tags = {t.get("k"): t.get("v") for t in w.iter("tag")}
        if "highway" not in tags:
            continue
        refs = [int(nd.get("ref")) for nd in w.iter("nd")]
        used.update(refs)
        ms = maxspeed(tags["maxspeed"]) if "maxspeed" in tags else None
        ln = lanes(tags["lanes"]) if "lanes" in tags else None
        ow = tags.get("oneway", "no")
        for a, b in zip(refs, refs[1:]):
            length = haversine(*nodes[a], *nodes[b])
            pairs = {"yes": [(a, b)], "-1": [(b, a)]}.get(ow, [(a, b), (b, a)])
            for u, v in pairs:
                edges.append((u, v, ms, ln, length, ow in ("yes", "-1"), tags["highway"], tags.get("name", "")))
    edges.sort(key=lambda e: (e[0], e[1]))
    out = Path(out_dir)
    with open(out / "expected_nodes.csv", "w", newline="\n") as f:
        f.write("id,lon,lat\n")
        for i in sorted(used):
            f.write(f"{i},{fmt(nodes[i][0])},{fmt(nodes[i][1])}\n")
    with open(out / "expected_edges.csv", "w", newline="\n") as f:
        f.write("u,v,maxspeed,lanes,length,oneway,highway,name\n")
        for u, v, ms, ln, length, ow, hw, name in edges:
            f.write(f"{u},{v},{fmt(ms)},{'' if ln is None else ln},{fmt(length)},"
                    f"{'true' if ow else 'false'},{hw},{name}\n")
    amen = []
    for n in root.iter("node"):
        for t in n.iter("tag"):
            if t.get("k") == "amenity":
                amen.append((int(n.get("id")), float(n.get("lon")), float(n.get("lat")), t.get("v")))
    with open(out / "expected_amenities.csv", "w", newline="\n") as f:
        f.write("id,lon,lat,amenity\n")
        for i, lon, lat, kind in sorted(amen):
            f.write(f"{i},{fmt(lon)},{fmt(lat)},{kind}\n")


if __name__ == "__main__":
    here = Path(__file__).resolve().parent
    main(sys.argv[1] if len(sys.argv) > 1 else here / "crossing.osm",
         sys.argv[2] if len(sys.argv) > 2 else here)
