#!/usr/bin/env python3
# Copyright 2026 The alttrip Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes the synthetic check-in fixture and its expected counts.

The counts in manifest.json come from the straightforward reconstruction
below, written independently of the C++ ingestion code: sort each user's
check-ins by time, cut where the gap exceeds 8 hours, keep the first visit
of each POI, and drop trajectories with fewer than three POIs.
"""

import csv
import json
import random
import sys
from pathlib import Path

GAP_SECONDS = 8 * 3600
CATEGORIES = ["museum", "park", "church", "market", "viewpoint"]


def reconstruct(visits):
    by_user = {}
    for user, poi, ts in visits:
        by_user.setdefault(user, []).append((ts, poi))
    routes = []
    for user in sorted(by_user):
        checkins = sorted(by_user[user])
        trajectories, current, last_ts = [], [], None
        for ts, poi in checkins:
            if last_ts is not None and ts - last_ts > GAP_SECONDS:
                trajectories.append(current)
                current = []
            current.append(poi)
            last_ts = ts
        trajectories.append(current)
        for traj in trajectories:
            seen, route = set(), []
            for poi in traj:
                if poi not in seen:
                    seen.add(poi)
                    route.append(poi)
            if len(route) >= 3:
                routes.append(route)
    return routes


def main(out_dir):
    rng = random.Random(20260101)
    n_pois = 24
    pois = []
    for pid in range(n_pois):
        lat = 55.94 + rng.uniform(-0.03, 0.03)
        lon = -3.19 + rng.uniform(-0.05, 0.05)
        pois.append((pid, round(lat, 6), round(lon, 6), CATEGORIES[pid % len(CATEGORIES)]))

    visits = []
    base = 1_600_000_000
    for u in range(60):
        user = f"user{u:03d}"
        t = base + rng.randint(0, 30 * 86400)
        for _ in range(rng.randint(1, 4)):
            stops = rng.randint(1, 7)
            for _ in range(stops):
                visits.append((user, rng.randrange(n_pois), t))
                # Short hops, an occasional repeat, and gaps near the 8 h cut.
                t += rng.choice([600, 1800, 3600, 7200, GAP_SECONDS])
            t += rng.choice([GAP_SECONDS + 1, 2 * 86400, 9 * 3600])
    # Unsorted rows: the loader must sort per user.
    rng.shuffle(visits)

    routes = reconstruct(visits)
    pairs = {(r[0], r[-1]) for r in routes}

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "pois.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["poi_id", "lat", "lon", "category"])
        w.writerows(pois)
    with open(out / "visits.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["user_id", "poi_id", "ts"])
        w.writerows(visits)
    manifest = {
        "pois": n_pois,
        "visits": len(visits),
        "routes": len(routes),
        "unique_pairs": len(pairs),
        "gap_hours": 8,
        "first_route": routes[0],
    }
    with open(out / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")
    print(json.dumps(manifest))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).parent / "synthetic")
