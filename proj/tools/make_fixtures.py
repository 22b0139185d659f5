#!/usr/bin/env python3
# Copyright 2026 The TGS Agent Authors
# SPDX-License-Identifier: Apache-2.0
"""Regenerates the synthetic test fixtures under tests/fixtures.

All rasters are tiny 8-bit PGM files; masks use 0 for background and 255 for
foreground. Run from the repository root.
"""

import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"
W = H = 8


def pgm(path, pixels, w=W, h=H):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(b"P5\n%d %d\n255\n" % (w, h) + bytes(pixels))


def frame(seed):
    return [(seed * 37 + x * 11 + y * 23) % 256 for y in range(H) for x in range(W)]


def mask(pred):
    return [255 if pred(x, y) else 0 for y in range(H) for x in range(W)]


def box(x1, y1, x2, y2):
    return mask(lambda x, y: x1 <= x < x2 and y1 <= y < y2)


EMPTY = mask(lambda x, y: False)


def write_json(path, doc):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def eval_fixture():
    base = ROOT / "eval"
    left = box(0, 0, 4, 8)
    top = box(0, 0, 8, 4)
    square = box(2, 2, 6, 6)
    shifted = box(3, 2, 7, 6)
    samples = {
        # uid: (split, reference, category, gt masks, predicted masks)
        "s1": ("seen", "the person playing the guitar", "guitar", [left, left], [left, left]),
        "s2": ("seen", "a dog barking at the door", "dog", [left, left], [top, EMPTY]),
        "u1": ("unseen", "the violin on the left", "violin", [square, square], [square, square]),
        "u2": ("unseen", "the small drum making a rhythmic sound", "drum", [square, square],
               [shifted, shifted]),
        "n1": ("null", "the trumpet being played loudly", None, None, [EMPTY, EMPTY]),
        "n2": ("null", "a cat meowing near the window", None, None, [box(0, 0, 4, 4), EMPTY]),
    }
    entries = []
    for k, (uid, (split, ref, cat, gt, pred)) in enumerate(samples.items()):
        frames = []
        for i in range(2):
            rel = f"frames/{uid}/{i:05d}.pgm"
            pgm(base / rel, frame(10 * k + i))
            frames.append(rel)
            pgm(base / "pred" / uid / f"{i:05d}.pgm", pred[i])
        entry = {"uid": uid, "split": split, "reference": ref, "frames": frames,
                 "provenance": "original"}
        if gt is not None:
            paths = []
            for i, m in enumerate(gt):
                rel = f"gt/{uid}/{i:05d}.pgm"
                pgm(base / rel, m)
                paths.append(rel)
            entry["gt_mask_paths"] = paths
        if cat is not None:
            entry["gt_category"] = cat
        entries.append(entry)
    write_json(base / "manifest.json", {"name": "eval-fixture", "version": "1", "entries": entries})


CHAIN = """<think>
The referential expression is: "{ref}". {body}
</think>
<answer>
   <f_object>
      {f}
   </f_object>
   <s_object>
      {s}
   </s_object>
</answer>
"""


def chain(ref, body, f, s):
    return CHAIN.format(ref=ref, body=body, f=f, s=s)


def mock_fixture():
    base = ROOT / "mock"
    refs = {
        "g1": ("seen", "the person playing the guitar", "guitar"),
        "g2": ("null", "the trumpet being played loudly", None),
        "g3": ("unseen", "the violin on the left", "violin"),
    }
    gts = {
        "g1": [box(1, 2, 5, 7), box(2, 2, 6, 8)],
        "g3": [box(0, 1, 3, 6), box(0, 1, 3, 6)],
    }
    entries = []
    for k, (uid, (split, ref, cat)) in enumerate(refs.items()):
        frames = []
        for i in range(2):
            rel = f"frames/{uid}/{i:05d}.pgm"
            pgm(base / rel, frame(3 * k + i))
            frames.append(rel)
        entry = {"uid": uid, "split": split, "reference": ref, "frames": frames,
                 "audio": f"audio/{uid}.wav", "provenance": "original"}
        (base / "audio").mkdir(parents=True, exist_ok=True)
        (base / "audio" / f"{uid}.wav").write_bytes(b"RIFF\x00\x00\x00\x00WAVE")
        if uid in gts:
            paths = []
            for i, m in enumerate(gts[uid]):
                rel = f"gt/{uid}/{i:05d}.pgm"
                pgm(base / rel, m)
                paths.append(rel)
            entry["gt_mask_paths"] = paths
        if cat:
            entry["gt_category"] = cat
        entries.append(entry)
    write_json(base / "manifest.json", {"name": "mock-fixture", "version": "1", "entries": entries})

    def cand(x1, y1, x2, y2, b, t):
        return {"x1": x1, "y1": y1, "x2": x2, "y2": y2, "box_score": b, "text_score": t}

    spec = {
        "think": {
            "g1": chain("the person playing the guitar",
                        "The video shows a person strumming a guitar near the centre. "
                        "The audio contains steady guitar chords. "
                        "The reference points at the instrument being played.",
                        "a wooden guitar held by a seated person", "guitar"),
            "g2": CHAIN.format(ref="the trumpet being played loudly",
                               body="The video shows an empty stage with chairs. "
                                    "The audio contains quiet room noise only. "
                                    "The reference names an object that never appears.",
                               f="null", s="null"),
            "g3": chain("the violin on the left",
                        "The video shows two string players side by side. "
                        "The audio contains a slow violin melody. "
                        "The reference relies on position to pick the left instrument.",
                        "the violin held by the left player", "violin"),
        },
        "ground": [
            {"frame": "g1/00000", "query": "guitar",
             "candidates": [cand(1, 2, 5, 7, 0.8, 0.6), cand(0, 0, 2, 2, 0.05, 0.9)]},
            {"frame": "g1/00001", "query": "guitar", "candidates": [cand(2, 2, 6, 8, 0.7, 0.5)]},
            {"frame": "g3/00000", "query": "violin", "candidates": [cand(0, 1, 3, 6, 0.9, 0.8)]},
            {"frame": "g3/00001", "query": "violin", "candidates": []},
        ],
        "segment": {"rule": "box_interior"},
        "generate": {
            "g1": "{\"complex_ref\": \"The handheld device creating localized heat and continuous ambient noise.\"}",
            "g2": "the trumpet being played loudly",
            "g3": "```json\n{\"complex_ref\": \"The instrument whose melody answers the partner on the right\"}\n```",
        },
    }
    write_json(base / "mock_spec.json", spec)
    mock = {"type": "mock", "spec": "mock_spec.json"}
    write_json(base / "config.json", {
        "tau_bbox": 0.1, "tau_text": 0.25, "prompt_type": "s", "box_selection": "box_score",
        "workers": 2,
        "backends": {"think": mock, "ground": mock, "segment": mock, "generate": mock},
    })
    # Every Ground call fails with a transport error.
    write_json(base / "config_unavailable.json", {
        "backends": {"think": mock, "ground": {"type": "http", "url": "http://127.0.0.1:9",
                                               "timeout_s": 1, "retries": 0},
                     "segment": mock},
    })


def chains_fixture():
    base = ROOT / "chains"
    good1 = chain("the person playing the guitar",
                  "The video shows a person strumming a guitar. The audio contains guitar chords. "
                  "The reference concerns the performer.",
                  "a person holding a guitar on stage", "person")
    good2 = chain("the barking dog", "The video shows a dog by a gate. The audio contains barking. "
                  "The reference combines sound and sight.",
                  "a brown dog barking beside the gate", "dog")
    merged = ("<think>\nThe referential expression is: \"the red car\". The video shows traffic. "
              "The audio contains engine noise. The reference targets the red vehicle.\n</think>\n"
              "<answer><f_object>a red car driving along the road</f_object>\n"
              "   <s_object>\n      car\n   </s_object>\n</answer>\n")
    rows = [
        {"uid": "c1", "reference": "the person playing the guitar", "chain": good1},
        {"uid": "c2", "reference": "the barking dog", "chain": good2},
        {"uid": "c3", "reference": "the red car", "chain": merged},
    ]
    base.mkdir(parents=True, exist_ok=True)
    (base / "corpus.jsonl").write_text("".join(json.dumps(r) + "\n" for r in rows))
    (base / "clean.jsonl").write_text("".join(json.dumps(r) + "\n" for r in rows[:2]))


if __name__ == "__main__":
    eval_fixture()
    mock_fixture()
    chains_fixture()
