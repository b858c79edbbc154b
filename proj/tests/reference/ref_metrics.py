"""Reference note metrics, written independently of the C++ engine.

usage: ref_metrics.py REF_DIR EST_DIR  -> JSON report on stdout
"""
import collections
import json
import math
import pathlib
import sys

import networkx as nx
import numpy as np

ONSET_TOL = 0.05
PITCH_TOL = 0.5
OFFSET_RATIO = 0.2
OFFSET_MIN = 0.05
HOP = 0.01


def read_notes(path):
    notes = []
    lines = [l.strip() for l in path.read_text().splitlines() if l.strip()]
    for i, line in enumerate(lines):
        fields = [f.strip() for f in line.split(",")]
        try:
            onset = float(fields[0])
        except ValueError:
            if i == 0:
                continue
            raise
        notes.append((onset, float(fields[1]), int(fields[2])))
    return notes


def compatible(r, e, offsets):
    if abs(r[2] - e[2]) > PITCH_TOL:
        return False
    if np.around(abs(r[0] - e[0]), 4) > ONSET_TOL:
        return False
    if offsets:
        tol = max(OFFSET_RATIO * (r[1] - r[0]), OFFSET_MIN)
        if np.around(abs(r[1] - e[1]), 4) > tol:
            return False
    return True


def matching_size(ref, est, offsets):
    g = nx.Graph()
    left = [("r", i) for i in range(len(ref))]
    g.add_nodes_from(left)
    g.add_nodes_from(("e", j) for j in range(len(est)))
    for i, r in enumerate(ref):
        for j, e in enumerate(est):
            if compatible(r, e, offsets):
                g.add_edge(("r", i), ("e", j))
    m = nx.bipartite.maximum_matching(g, top_nodes=left)
    return sum(1 for k in m if k[0] == "r")


def prf(matches, n_ref, n_est):
    p = matches / n_est if n_est else 0.0
    r = matches / n_ref if n_ref else 0.0
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return p, r, f


def roll(notes, n_frames):
    frames = [collections.Counter() for _ in range(n_frames)]
    for on, off, pitch in notes:
        for t in range(n_frames):
            start = t * HOP
            if on <= start < off:
                frames[t][pitch] += 1
    return frames


def accuracy(ref, est):
    end = max([n[1] for n in ref + est], default=0.0)
    n_frames = int(math.ceil(end / HOP)) + 2
    a, b = roll(ref, n_frames), roll(est, n_frames)
    tp = fp = fn = 0
    for x, y in zip(a, b):
        hit = sum((x & y).values())
        tp += hit
        fn += sum(x.values()) - hit
        fp += sum(y.values()) - hit
    total = tp + fp + fn
    return tp / total if total else 0.0


def main():
    ref_dir, est_dir = pathlib.Path(sys.argv[1]), pathlib.Path(sys.argv[2])
    tracks = []
    for ref_path in sorted(ref_dir.glob("*.csv")):
        est_path = est_dir / ref_path.name
        if not est_path.exists():
            continue
        ref, est = read_notes(ref_path), read_notes(est_path)
        p, r, f = prf(matching_size(ref, est, True), len(ref), len(est))
        pno, rno, fno = prf(matching_size(ref, est, False), len(ref), len(est))
        tracks.append({
            "name": ref_path.stem, "F": f, "Fno": fno, "Acc": accuracy(ref, est),
            "precision": p, "recall": r, "precision_no_offset": pno, "recall_no_offset": rno,
            "n_ref": len(ref), "n_est": len(est),
        })
    mean = {k: sum(t[k] for t in tracks) / len(tracks) for k in ("F", "Fno", "Acc")}
    json.dump({"per_track": tracks, "mean": mean}, sys.stdout, indent=2)


if __name__ == "__main__":
    main()
