#!/usr/bin/env python3
# Copyright 2026 The DPAD Toolkit Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Regenerates the JSON fixtures in this directory.

The binary store and golden outputs are produced by the dpad binary:

  dpad pack-embeddings --in embeddings.jsonl --out embeddings.dpde
  dpad score --bundle bundle.json --config score_config.json \
      --out score_golden.jsonl

expected_scores.json holds r_final values computed here, independently of
the C++ code, and is checked against the golden output by the tests.
"""

import json
import math
import os

HERE = os.path.dirname(os.path.abspath(__file__))
H, W = 48, 64

GT = {"bbox": [10, 8, 30, 28], "p1": [15, 12], "p2": [25, 24]}


def answer(bbox, p1, p2):
  return json.dumps({"bbox": bbox, "points_1": p1, "points_2": p2})


def shifted(dx, dy):
  b = GT["bbox"]
  return ([b[0] + dx, b[1] + dy, b[2] + dx, b[3] + dy],
          [GT["p1"][0] + dx, GT["p1"][1] + dy], [GT["p2"][0] + dx, GT["p2"][1] + dy])


def text(think, ans, caption):
  return f"<think>{think}</think>\n<answer>{ans}</answer>\n<caption>{caption}</caption>"


ROLLOUTS = [
    ("s01", text("the red cup left of the plate", answer(*shifted(1, 1)), "red cup"), 42),
    ("s02", text("two cups, picking the right one", answer(*shifted(4, 0)), "a cup"), None),
    ("s03", "<think>no caption here</think><answer>" + answer(*shifted(0, 0)) + "</answer>", 17),
    ("s04", text("far away", answer([40, 30, 60, 46], [45, 35], [55, 40]), "   "), 9),
    ("s05", text("broken payload", '{"bbox": [1, 2, 3, 4], "points_1": [1, 2]', "dog"), 11),
    ("s06", text("partial overlap", answer(*shifted(10, 10)), "the striped dog"), 30),
    ("s07", "<answer>" + answer(*shifted(0, 0)) + "</answer><think>late</think><caption>x</caption>", 8),
    ("s08", text("exact match", answer(*shifted(0, 0)), "green bottle on the shelf"), 64),
]

# Unit-norm is not required; vectors use small dyadic values so float32 is exact.
EMB = {
    "s01": {"caption": [1, 0.5, 0, 0, 0, 0, 0.25, 0], "roi": [1, 0.5, 0, 0, 0, 0, 0, 0],
            "aoi": [0.5, 0.5, 0.5, 0.5, 0, 0, 0.25, 0], "think": [1, 0, 0, 0.5, 0, 0, 0, 0]},
    "s02": {"caption": [0, 0, 1, 1, 0, 0, 0, 0], "roi": [1, 0, 0.5, 0, 0, 0, 0, 0],
            "aoi": [0.5, 0, 1, 1, 0, 0, 0, 0]},
    "s04": {"caption": [0, 0, 0, 0, 1, 0, 0, 0], "roi": [0, 0, 0, 0, 1, 0.5, 0, 0],
            "aoi": [0.25, 0.25, 0, 0, 1, 1, 0, 0]},
    "s06": {"caption": [0, 1, 0, 0, 0, 0, 1, 0], "roi": [0, 1, 0, 0, 0, 0, 0.75, 0],
            "aoi": [0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5]},
    "s08": {"caption": [0, 0, 0, 0, 0, 0, 1, 1], "roi": [0, 0, 0, 0, 0, 0.25, 1, 1],
            "aoi": [0.5, 0, 0, 0, 0, 0.5, 1, 0.5], "think": [0, 0, 0, 0, 0, 0, 1, 0.5]},
}

STRATA = {
    "s01": ("Attribute", "Easy"), "s02": ("Relation", "Hard"), "s03": ("Logic", "Medium"),
    "s04": ("Attribute", "Medium"), "s05": ("Relation", None), "s06": ("Logic", "Hard"),
    "s07": (None, "Easy"), "s08": ("Attribute", "Easy"),
}


def rle_of_box(b):
  """Column-major runs of a pixel-center rasterized box, leading zero run."""
  flat = []
  for col in range(W):
    for row in range(H):
      inside = b[0] <= col + 0.5 < b[2] and b[1] <= row + 0.5 < b[3]
      flat.append(1 if inside else 0)
  counts, cur, run = [], 0, 0
  for v in flat:
    if v == cur:
      run += 1
    else:
      counts.append(run)
      cur, run = v, 1
  counts.append(run)
  return {"h": H, "w": W, "counts": counts}


def cosine(a, b):
  dot = sum(x * y for x, y in zip(a, b))
  return dot / (math.sqrt(sum(x * x for x in a)) * math.sqrt(sum(y * y for y in b)))


def box_iou(a, b):
  iw = max(0, min(a[2], b[2]) - max(a[0], b[0]))
  ih = max(0, min(a[3], b[3]) - max(a[1], b[1]))
  inter = iw * ih
  area = lambda r: (r[2] - r[0]) * (r[3] - r[1])
  return inter / (area(a) + area(b) - inter)


def expected_r_final(sample_id, raw, tokens):
  """Binary variant, unit weights, sum format reward, no length penalty."""
  tags = ["<think>", "</think>", "<answer>", "</answer>", "<caption>", "</caption>"]
  pos = [raw.find(t) for t in tags]
  tags_ok = all(raw.count(t) == 1 for t in tags) and pos == sorted(pos)
  json_ok, loc = False, None
  if "<answer>" in raw and "</answer>" in raw[raw.find("<answer>"):]:
    inner = raw[raw.find("<answer>") + 8:raw.find("</answer>", raw.find("<answer>"))]
    try:
      loc = json.loads(inner)
      json_ok = all(k in loc for k in ("bbox", "points_1", "points_2"))
    except json.JSONDecodeError:
      loc = None
  cap_ok = False
  if "<caption>" in raw:
    start = raw.find("<caption>") + 9
    end = raw.find("</caption>", start)
    cap_ok = end >= 0 and raw[start:end].strip() != ""
  fmt = int(tags_ok) + int(json_ok) + int(cap_ok)
  if not (tags_ok and json_ok):
    return fmt
  b = loc["bbox"]
  geo = int(box_iou(b, GT["bbox"]) > 0.5)
  geo += int(sum(abs(x - y) for x, y in zip(b, GT["bbox"])) / 4 < 10)
  pts = loc["points_1"] + loc["points_2"]
  gpts = GT["p1"] + GT["p2"]
  geo += int(sum(abs(x - y) for x, y in zip(pts, gpts)) / 4 < 10)
  e = EMB[sample_id]
  s1, s2 = cosine(e["caption"], e["roi"]), cosine(e["caption"], e["aoi"])
  return fmt + geo + (1 if s1 - s2 > 0 else 0)


def write_jsonl(name, rows):
  with open(os.path.join(HERE, name), "w") as f:
    for r in rows:
      f.write(json.dumps(r) + "\n")


def main():
  rollouts = []
  for sid, t, tok in ROLLOUTS:
    rec = {"sample_id": sid, "text": t}
    if tok is not None:
      rec["token_count"] = tok
    rollouts.append(rec)
  write_jsonl("rollouts.jsonl", rollouts)

  gt_rows = []
  for sid, t, _ in ROLLOUTS:
    row = {"sample_id": sid, "gt_bbox": GT["bbox"], "gt_p1": GT["p1"], "gt_p2": GT["p2"],
           "gt_mask": rle_of_box(GT["bbox"])}
    # Two samples carry a segmenter mask; the rest fall back to their boxes.
    if sid == "s01":
      row["pred_mask"] = rle_of_box(shifted(1, 1)[0])
    if sid == "s02":
      row["pred_mask"] = rle_of_box([14, 8, 34, 20])
    gt_rows.append(row)
  write_jsonl("gt.jsonl", gt_rows)

  emb_rows = []
  for sid in sorted(EMB):
    for role in ("caption", "roi", "aoi", "think"):
      if role in EMB[sid]:
        emb_rows.append({"sample_id": sid, "role": role, "vector": EMB[sid][role]})
  write_jsonl("embeddings.jsonl", emb_rows)

  strata_rows = []
  for sid, (qt, diff) in STRATA.items():
    row = {"sample_id": sid}
    if qt:
      row["query_type"] = qt
    if diff:
      row["difficulty"] = diff
    strata_rows.append(row)
  write_jsonl("strata.jsonl", strata_rows)

  def dump(name, obj):
    with open(os.path.join(HERE, name), "w") as f:
      json.dump(obj, f, indent=2)
      f.write("\n")

  dump("bundle.json", {"rollouts": "rollouts.jsonl", "ground_truth": "gt.jsonl",
                       "embeddings": "embeddings.dpde", "strata": "strata.jsonl"})
  dump("score_config.json", {"lambda_format": 1.0, "lambda_geo": 1.0, "lambda_dpad": 1.0,
                             "dpad_variant": "binary"})
  dump("toy.json", {"steps": 300, "seed": 3})
  dump("expected_scores.json",
       {sid: expected_r_final(sid, t, tok) for sid, t, tok in ROLLOUTS})


if __name__ == "__main__":
  main()
