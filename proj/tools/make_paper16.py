#!/usr/bin/env python3
"""Writes scenarios/paper16.json: 16 RISs, 14 users, 20 m x 20 m floor.

The floor is split into four 10 m x 10 m rooms by two full-height walls that
cross at the centre. A 1.2 m column (2.8 m tall) fills the gap where the walls
meet; the BS hangs above it at 3.5 m, so it reaches all four rooms while any
ray between two rooms at panel/user height is blocked.

Each room has four panels, described in room-local (u, v) coordinates where
(0, 0) is the floor centre and u, v grow towards the room's outer walls:
  hub    next to the BS, turned towards the shared wall so it sees the BS and
         the relay but not the open room
  relay  free-standing, turned away from the BS
  east   on the outer u = 10 wall
  north  on the outer v = 10 wall
The user standing next to the relay is best served over hub -> relay; everyone
else is best served by one outer-wall panel.
"""
import json
import math
import sys
from pathlib import Path

CENTRE = 10.0
ROOMS = [(+1, +1), (-1, +1), (-1, -1), (+1, -1)]

# Per-room layout; each room is a slightly different floor plan.
LAYOUT = [
    dict(hub=(1.2, 0.30), relay=(1.50, 3.2), east=2.5, north=4.5,
         users=[(2.5, 3.5), (6.0, 2.0), (8.5, 3.5), (3.5, 8.5)]),
    dict(hub=(1.3, 0.35), relay=(1.60, 3.4), east=2.8, north=4.8,
         users=[(2.5, 3.5), (8.5, 3.0), (3.0, 8.5), (7.5, 8.0)]),
    dict(hub=(1.1, 0.30), relay=(1.45, 3.0), east=2.2, north=5.0,
         users=[(2.5, 3.3), (6.5, 3.0), (3.5, 8.5)]),
    dict(hub=(1.25, 0.40), relay=(1.55, 3.3), east=3.0, north=4.2,
         users=[(2.6, 3.4), (6.5, 3.0), (8.0, 7.5)]),
]

BS_Z, HUB_Z, RELAY_Z, WALL_Z, USER_Z = 3.5, 2.5, 1.8, 2.5, 1.2


def unit(v):
    n = math.sqrt(sum(c * c for c in v))
    return [c / n for c in v]


def to_global(room, u, v, z):
    su, sv = ROOMS[room]
    return [CENTRE + su * u, CENTRE + sv * v, z]


def to_global_dir(room, nu, nv):
    su, sv = ROOMS[room]
    return unit([su * nu, sv * nv, 0.0])


def build(seed=20240611):
    ris, users = [], []
    for r, lay in enumerate(LAYOUT):
        ris.append((to_global(r, *lay["hub"], HUB_Z), to_global_dir(r, -1.0, 0.3)))
        ris.append((to_global(r, *lay["relay"], RELAY_Z), to_global_dir(r, 1.0, -0.2)))
        ris.append((to_global(r, 9.9, lay["east"], WALL_Z), to_global_dir(r, -1.0, 0.0)))
        ris.append((to_global(r, lay["north"], 9.9, WALL_Z), to_global_dir(r, 0.0, -1.0)))
        users += [to_global(r, u, v, USER_Z) for (u, v) in lay["users"]]

    nodes = [{"index": 0, "kind": "bs", "position_m": [CENTRE, CENTRE, BS_Z]}]
    for pos, normal in ris:
        nodes.append({"index": len(nodes), "kind": "ris", "position_m": pos,
                      "elements_x": 4, "elements_y": 5, "facing_normal": normal})
    for pos in users:
        nodes.append({"index": len(nodes), "kind": "user", "position_m": pos})

    t = 0.05  # half wall thickness
    gap = 0.6
    obstacles = [
        {"min_m": [CENTRE - gap, CENTRE - gap, 0.0], "max_m": [CENTRE + gap, CENTRE + gap, 2.8]},
        {"min_m": [CENTRE + gap, CENTRE - t, 0.0], "max_m": [20.0, CENTRE + t, 4.0]},
        {"min_m": [0.0, CENTRE - t, 0.0], "max_m": [CENTRE - gap, CENTRE + t, 4.0]},
        {"min_m": [CENTRE - t, CENTRE + gap, 0.0], "max_m": [CENTRE + t, 20.0, 4.0]},
        {"min_m": [CENTRE - t, 0.0, 0.0], "max_m": [CENTRE + t, CENTRE - gap, 4.0]},
    ]
    for su, sv in ROOMS:
        # partition v = 5 from u = 3 out to the outer wall
        a = to_global(ROOMS.index((su, sv)), 3.0, 5.0 - t, 0.0)
        b = to_global(ROOMS.index((su, sv)), 10.0, 5.0 + t, 4.0)
        obstacles.append({"min_m": [min(a[i], b[i]) for i in range(3)],
                          "max_m": [max(a[i], b[i]) for i in range(3)]})
    return {
        "name": "paper16",
        "wavelength_m": 0.06,
        "bs_antennas": 20,
        "ref_gain_dB": -46.4,
        "noise_power_dBm": -100.0,
        "tx_power_dBW": 10.0,
        "bs_boresight": unit([1.0, 1.0, 0.0]),
        "seed": seed,
        "visibility": {"max_range_m": None, "obstacles": obstacles, "overrides": []},
        "nodes": nodes,
    }


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "scenarios" / "paper16.json"
    out.write_text(json.dumps(build(), indent=2) + "\n")


if __name__ == "__main__":
    main()
