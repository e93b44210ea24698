#!/usr/bin/env python3
"""Compare poses written by `cloudreg merge --transforms` with a fixture's q_poses.json.

usage: verify_merge.py TRUTH_POSES MERGED_POSES [--max-deg 2] [--max-m 0.05]
Exit status 0 when every pose is within tolerance, 1 otherwise.
"""
import argparse
import json
import math
import sys


def load(path):
    with open(path) as f:
        return json.load(f)["poses"]


def rotation_angle_deg(ra, rb):
    # angle of ra^T rb
    trace = sum(ra[k][i] * rb[k][i] for i in range(3) for k in range(3))
    return math.degrees(math.acos(max(-1.0, min(1.0, (trace - 1.0) / 2.0))))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("truth")
    ap.add_argument("merged")
    ap.add_argument("--max-deg", type=float, default=2.0)
    ap.add_argument("--max-m", type=float, default=0.05)
    args = ap.parse_args()
    truth, merged = load(args.truth), load(args.merged)
    if len(truth) != len(merged):
        print(f"pose count differs: {len(truth)} vs {len(merged)}")
        return 1
    ok = True
    for i, (t, m) in enumerate(zip(truth, merged)):
        deg = rotation_angle_deg(t["R"], m["R"])
        dist = math.dist(t["t"], m["t"])
        good = deg < args.max_deg and dist < args.max_m
        ok &= good
        print(f"view {i}: {deg:.3f} deg, {dist:.4f} m {'ok' if good else 'FAIL'}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
