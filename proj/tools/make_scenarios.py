#!/usr/bin/env python3
"""Writes the bundled scenarios and test fixtures.

Each scenario is checked by a brute-force enumeration written here, apart
from the C++ loader, before it is written out.

    python3 tools/make_scenarios.py [--check]
"""

import argparse
import json
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent

RATINGS = ["G", "PG", "PG-13", "R"]
WEEKDAYS = {"mar-12": "Thursday", "mar-13": "Friday", "mar-14": "Saturday",
            "mar-15": "Sunday", "mar-16": "Monday"}

LAYOUT = [  # row, zone, tiers
    ("A", "front", "ssssssss"),
    ("B", "front", "ssssssss"),
    ("C", "middle", "ssppppss"),
    ("D", "middle", "ssppppss"),
    ("E", "back", "ssssssss"),
    ("F", "back", "ssssssss"),
]


def clock(hhmm):
    return hhmm // 100 * 60 + hhmm % 100


def hhmm(minutes):
    return minutes // 60 * 100 + minutes % 60


def clock_label(minutes):
    h, m = divmod(minutes, 60)
    return f"{(h + 11) % 12 + 1}:{m:02d} {'PM' if h >= 12 else 'AM'}"


def movie_stage(extra=True):
    specs = [
        {"name": "rating", "kind": "ordinal", "order": RATINGS},
        {"name": "runtime", "kind": "numeric", "unit": "min", "higherIsBetter": False},
        {"name": "genre", "kind": "categorical"},
    ]
    if extra:
        specs += [
            {"name": "tone", "kind": "categorical"},
            {"name": "score", "kind": "numeric", "unit": "/10", "higherIsBetter": True, "display": "audience score"},
        ]
    return {"id": "movie", "title": "Movie", "uiKind": "buttonGroup", "filterable": True, "attributeSpecs": specs}


def theater_stage():
    return {"id": "theater", "title": "Theater", "uiKind": "buttonGroup", "filterable": True,
            "attributeSpecs": [
                {"name": "distance", "kind": "numeric", "unit": "mi", "higherIsBetter": False},
                {"name": "imax", "kind": "boolean", "display": "IMAX"},
                {"name": "screens", "kind": "numeric", "display": "screens"},
            ]}


def date_stage():
    return {"id": "date", "title": "Date", "uiKind": "calendar", "filterable": False,
            "attributeSpecs": [
                {"name": "date", "kind": "categorical", "augmentAs": ["weekday"]},
                {"name": "weekday", "kind": "categorical"},
            ]}


def time_stage(imax=False):
    specs = [
        {"name": "start", "kind": "numeric", "unit": "clock", "augmentAs": ["end"]},
        {"name": "end", "kind": "numeric", "unit": "clock", "display": "ends"},
    ]
    if imax:
        specs.append({"name": "imax", "kind": "boolean", "display": "IMAX"})
    return {"id": "time", "title": "Showtime", "uiKind": "buttonGroup", "filterable": True, "attributeSpecs": specs}


def seat_stage():
    return {"id": "seat", "title": "Seats", "uiKind": "seatMap", "filterable": False,
            "attributeSpecs": [
                {"name": "count", "kind": "numeric", "display": "seats"},
                {"name": "tier", "kind": "categorical"},
                {"name": "zone", "kind": "categorical"},
                {"name": "row", "kind": "categorical"},
            ]}


def confirmation_stage():
    return {"id": "confirmation", "title": "Confirmation", "uiKind": "confirmation", "filterable": False}


def movie(id_, label, rating, runtime, genre, tone=None, score=None):
    attrs = {"rating": rating, "runtime": runtime, "genre": genre}
    if tone is not None:
        attrs["tone"] = tone
    if score is not None:
        attrs["score"] = score
    return {"id": id_, "label": label, "attributes": attrs}


def theater(id_, label, distance, imax, screens):
    return {"id": id_, "label": label, "attributes": {"distance": distance, "imax": imax, "screens": screens}}


def date_item(id_):
    month, day = id_.split("-")
    return {"id": id_, "label": f"{month.capitalize()} {int(day)}",
            "attributes": {"date": f"{month.capitalize()} {int(day)}", "weekday": WEEKDAYS[id_]}}


def time_item(start_hhmm, runtime):
    start = clock(start_hhmm)
    end = start + runtime
    return {"id": f"t{start_hhmm:04d}-{hhmm(end):04d}", "label": clock_label(start),
            "attributes": {"start": start, "end": end}}


def grid(prefix, taken):
    rows = []
    for row, zone, tiers in LAYOUT:
        rows.append({"row": row, "zone": zone, "tiers": tiers, "taken": taken.get(row, "." * len(tiers))})
    return {"prefix": prefix, "rows": rows, "maxBlock": 4}


def constraint(attribute, comparator, value):
    return {"type": "constraint", "attribute": attribute, "comparator": comparator, "value": value}


def predicate(name, *args):
    return {"type": "constraint", "comparator": "predicate", "value": {"name": name, "args": list(args)}}


def objective(attribute, direction=None, prefer=None):
    o = {"type": "objective", "attribute": attribute}
    if direction:
        o["direction"] = direction
    if prefer is not None:
        o["preferSet"] = prefer
    return o


class Builder:
    """Accumulates option universes and availability tables."""

    def __init__(self, stages):
        self.stages = stages
        self.items = {s["id"]: {} for s in stages if s["uiKind"] not in ("seatMap", "confirmation")}
        self.avail = {sid: [] for sid in self.items}
        self.grids = []

    def offer(self, stage, prefix, items):
        for it in items:
            prev = self.items[stage].get(it["id"])
            assert prev is None or prev == it, f"conflicting definitions of {it['id']}"
            self.items[stage][it["id"]] = it
        self.avail[stage].append({"prefix": list(prefix), "ids": [it["id"] for it in items]})

    def seats(self, prefix, taken):
        self.grids.append(grid(list(prefix), taken))

    def options(self, order=None):
        out = {}
        for sid, items in self.items.items():
            ids = list(items)
            if order and sid in order:
                ids = sorted(ids, key=order[sid])
            out[sid] = {"items": [items[i] for i in ids], "availability": self.avail[sid]}
        return out


# ---------------------------------------------------------------- oracle ----

def seat_blocks(g):
    out = []
    for r in g["rows"]:
        n = len(r["tiers"])
        for start in range(n):
            for size in range(1, g["maxBlock"] + 1):
                end = start + size
                if end > n or "x" in r["taken"][start:end]:
                    break
                tiers = set(r["tiers"][start:end])
                tier = "premium" if tiers == {"p"} else "standard" if tiers == {"s"} else "mixed"
                name = f"{r['row']}{start + 1}" if size == 1 else f"{r['row']}{start + 1}-{r['row']}{end}"
                out.append({"id": name, "attributes": {"count": size, "tier": tier, "zone": r["zone"], "row": r["row"]}})
    return out


def holds(c, attrs, order):
    if c["comparator"] == "predicate":
        name, args = c["value"]["name"], c["value"]["args"]
        attr = {"adjacentSeats": "count", "countIs": "count", "tierIs": "tier",
                "startsAfter": "start", "endsBy": "end"}[name]
        if attr not in attrs:
            return True
        v = attrs[attr]
        return {"adjacentSeats": v == args[0], "countIs": v == args[0], "tierIs": v == args[0],
                "startsAfter": v > args[0], "endsBy": v <= args[0]}[name]
    a = c["attribute"]
    if a not in attrs:
        return True
    v, want = attrs[a], c["value"]
    if a in order:
        v = order[a].index(v)
        want = [order[a].index(x) for x in want] if isinstance(want, list) else order[a].index(want)
    cmp = c["comparator"]
    if cmp == "eq":
        return v == want
    if cmp == "neq":
        return v != want
    if cmp == "le":
        return v <= want
    if cmp == "ge":
        return v >= want
    if cmp == "between":
        return want[0] <= v <= want[1]
    if cmp == "inSet":
        return v in want
    raise ValueError(cmp)


def brute_force(doc):
    stages = [s for s in doc["workflow"]["stages"] if s["uiKind"] != "confirmation"]
    items = {sid: {it["id"]: it for it in so["items"]} for sid, so in doc["options"].items()}
    avail = {sid: {"/".join(e["prefix"]): e["ids"] for e in so["availability"]} for sid, so in doc["options"].items()}
    grids = {"/".join(g["prefix"]): g for g in doc.get("seatGrids", [])}
    orders = {}
    for s in stages:
        for spec in s.get("attributeSpecs", []):
            if spec["kind"] == "ordinal":
                orders[spec["name"]] = spec["order"]

    def options(k, prefix):
        key = "/".join(prefix)
        if stages[k]["uiKind"] == "seatMap":
            return seat_blocks(grids[key])
        return [items[stages[k]["id"]][i] for i in avail[stages[k]["id"]][key]]

    def ok(k, prefix, item):
        for pref in doc.get("scriptedPreferences", {}).get(stages[k]["id"], []):
            if pref["strength"] != "hard":
                continue
            group = pref.get("constraints", [])
            if pref.get("cases"):
                group = []
                for case in pref["cases"]:
                    idx = {s["id"]: i for i, s in enumerate(stages)}
                    if all(prefix[idx[ws]] in ids for ws, ids in case["when"].items()):
                        group = case["constraints"]
                        break
            if not all(holds(c, item["attributes"], orders) for c in group):
                return False
        return True

    total, found = 0, []

    def walk(prefix):
        nonlocal total
        k = len(prefix)
        if k == len(stages):
            total += 1
            return
        for it in options(k, prefix):
            if ok(k, prefix, it):
                walk(prefix + [it["id"]])
            else:
                count_subtree(k + 1, prefix + [it["id"]])

    def count_subtree(k, prefix):
        nonlocal total
        if k == len(stages):
            total += 1
            return
        for it in options(k, prefix):
            count_subtree(k + 1, prefix + [it["id"]])

    def solve(prefix):
        k = len(prefix)
        if k == len(stages):
            found.append(prefix)
            return
        for it in options(k, prefix):
            if ok(k, prefix, it):
                solve(prefix + [it["id"]])

    walk([])
    solve([])
    return found, total


# ------------------------------------------------------------- scenarios ----

def full_workflow(time_imax=False):
    return [movie_stage(), theater_stage(), date_stage(), time_stage(time_imax), seat_stage(), confirmation_stage()]


def open_grid_taken(seed):
    """Premium seats in row C and D alternate taken, so no premium pair is
    ever free; the rest is a deterministic scatter."""
    taken = {}
    for i, (row, zone, tiers) in enumerate(LAYOUT):
        cells = []
        for c in range(len(tiers)):
            if row in ("C", "D") and tiers[c] == "p":
                cells.append("x" if c % 2 == 1 else ".")
            else:
                cells.append("x" if (seed * 7 + i * 3 + c * 5) % 11 < 3 else ".")
        taken[row] = "".join(cells)
    return taken


def parents_anniversary():
    stages = full_workflow()
    b = Builder(stages)
    movies = [
        movie("harbor-lights", "Harbor Lights", "PG-13", 118, "romance", "warm", 7.4),
        movie("midnight-vows", "Midnight Vows", "R", 126, "romance", "tense", 8.1),
        movie("paper-moons", "Paper Moons", "PG", 96, "comedy", "quirky", 6.9),
        movie("steel-horizon", "Steel Horizon", "PG-13", 131, "action", "tense", 7.7),
    ]
    theaters = {
        "bayside": theater("bayside", "Bayside Cinema", 1.2, False, 6),
        "grand-oak": theater("grand-oak", "Grand Oak Theatre", 3.8, False, 4),
        "lakeshore": theater("lakeshore", "Lakeshore 10", 7.5, True, 10),
    }
    b.offer("movie", [], movies)
    runtime = {m["id"]: m["attributes"]["runtime"] for m in movies}
    plan = {
        "harbor-lights": {
            "bayside": {"mar-13": [1900], "mar-14": [1400, 2115], "mar-15": [1300, 1900]},
            "grand-oak": {"mar-14": [1630, 1915], "mar-15": [1030], "mar-16": [1900]},
            "lakeshore": {"mar-14": [1700], "mar-15": [1100]},
        },
        "midnight-vows": {
            "bayside": {"mar-14": [1645, 2030], "mar-15": [1100]},
            "lakeshore": {"mar-13": [1930], "mar-14": [1600]},
        },
        "paper-moons": {
            "grand-oak": {"mar-14": [1300, 1700], "mar-15": [1000, 1500]},
            "lakeshore": {"mar-14": [1800], "mar-16": [1230]},
        },
        "steel-horizon": {
            "bayside": {"mar-13": [2000], "mar-14": [1500]},
            "lakeshore": {"mar-14": [1900, 2200], "mar-15": [1130]},
        },
    }
    seed = 0
    for m, by_theater in plan.items():
        b.offer("theater", [m], [theaters[t] for t in by_theater])
        for t, by_date in by_theater.items():
            b.offer("date", [m, t], [date_item(d) for d in by_date])
            for d, starts in by_date.items():
                slots = [time_item(s, runtime[m]) for s in starts]
                b.offer("time", [m, t, d], slots)
                for slot in slots:
                    prefix = [m, t, d, slot["id"]]
                    if prefix == ["harbor-lights", "grand-oak", "mar-14", "t1630-1828"]:
                        taken = open_grid_taken(seed)
                        taken["C"] = "...x.x.."
                        taken["D"] = "..x..x.."
                        b.seats(prefix, taken)
                    else:
                        b.seats(prefix, open_grid_taken(seed))
                    seed += 1
    doc = {
        "brief": {
            "id": "parents-anniversary-gift",
            "title": "Parents Anniversary Gift",
            "background": (
                "You are booking a movie for your parents' anniversary. It has to be a romance rated PG-13 or "
                "below, and a warm, familiar tone would suit them. Start with the closest theater but be ready "
                "to switch for better timing or seating. Saturday, March 14 is preferred, and Sunday, March 15 "
                "also works. On Saturday the movie must start after 4:00 PM and end by 9:00 PM; on Sunday it "
                "must be a morning show. They need two adjacent premium seats."),
        },
        "workflow": {"stages": stages},
        "options": b.options(order={"date": lambda i: i, "time": lambda i: i}),
        "seatGrids": b.grids,
        "scriptedPreferences": {
            "movie": [
                {"description": "A romance rated PG-13 or below", "strength": "hard",
                 "constraints": [constraint("rating", "le", "PG-13"), constraint("genre", "eq", "romance")]},
                {"description": "Warm and familiar in tone", "strength": "soft",
                 "objective": objective("tone", prefer=["warm"])},
            ],
            "theater": [
                {"description": "Start with the closest theater", "strength": "soft",
                 "objective": objective("distance", "minimize")},
            ],
            "date": [
                {"description": "Saturday, March 14 or Sunday, March 15", "strength": "hard",
                 "constraints": [constraint("date", "inSet", ["Mar 14", "Mar 15"])]},
                {"description": "Saturday preferred", "strength": "soft",
                 "objective": objective("weekday", prefer=["Saturday"])},
            ],
            "time": [
                {"description": "Saturday: start after 4:00 PM and end by 9:00 PM; Sunday: a morning show",
                 "strength": "hard",
                 "cases": [
                     {"when": {"date": ["mar-14"]},
                      "constraints": [predicate("startsAfter", 960), predicate("endsBy", 1260)]},
                     {"when": {"date": ["mar-15"]}, "constraints": [constraint("start", "le", 719)]},
                 ]},
            ],
            "seat": [
                {"description": "Two adjacent premium seats", "strength": "hard",
                 "constraints": [predicate("adjacentSeats", 2), predicate("tierIs", "premium")]},
            ],
        },
        "solution": ["harbor-lights", "grand-oak", "mar-14", "t1630-1828", "D4-D5"],
    }
    return doc


def sibling_comedy():
    stages = full_workflow()
    b = Builder(stages)
    movies = [
        movie("casserole", "Attack of the 50 Foot Casserole", "PG-13", 92, "cult comedy", "campy", 4.1),
        movie("robo-ranch", "Robo Ranch Rumble", "PG-13", 101, "cult comedy", "campy", 5.3),
        movie("quiet-orchard", "The Quiet Orchard", "PG", 115, "drama", "gentle", 8.2),
        movie("laser-nuns", "Laser Nuns from Mars", "R", 88, "cult horror", "campy", 6.0),
    ]
    theaters = {
        "galaxy": theater("galaxy", "Galaxy 14", 2.0, True, 14),
        "bijou": theater("bijou", "The Bijou", 5.5, False, 1),
        "northgate": theater("northgate", "Northgate 8", 3.1, False, 8),
    }
    b.offer("movie", [], movies)
    runtime = {m["id"]: m["attributes"]["runtime"] for m in movies}
    plan = {
        "casserole": {
            "galaxy": {"mar-13": [1900, 2130], "mar-14": [2000]},
            "bijou": {"mar-13": [1600, 2230], "mar-14": [1900], "mar-15": [1700, 2000]},
        },
        "robo-ranch": {
            "galaxy": {"mar-12": [1900], "mar-13": [2000], "mar-14": [1830]},
            "bijou": {"mar-13": [1700, 1930, 2145], "mar-14": [1500, 2200]},
            "northgate": {"mar-13": [1845], "mar-15": [1900]},
        },
        "quiet-orchard": {
            "galaxy": {"mar-13": [1900], "mar-14": [1400]},
            "northgate": {"mar-13": [2000], "mar-14": [1730]},
        },
        "laser-nuns": {
            "galaxy": {"mar-13": [2200]},
            "bijou": {"mar-13": [1930], "mar-14": [2100]},
        },
    }
    singles = {"A": "x.x.x.x.", "B": ".x.x.x.x", "C": "x.x.x.x.", "D": ".x.x.x.x",
               "E": "......xx", "F": "xx......"}
    seed = 0
    for m, by_theater in plan.items():
        b.offer("theater", [m], [theaters[t] for t in by_theater])
        for t, by_date in by_theater.items():
            b.offer("date", [m, t], [date_item(d) for d in by_date])
            for d, starts in by_date.items():
                slots = [time_item(s, runtime[m]) for s in starts]
                b.offer("time", [m, t, d], slots)
                for slot in slots:
                    prefix = [m, t, d, slot["id"]]
                    taken = dict(singles)
                    taken["F"] = ["xx......", "..xx....", "....xx..", "......xx"][seed % 4]
                    if prefix == ["robo-ranch", "bijou", "mar-13", "t1930-2111"]:
                        taken["D"] = "x.x..x.x"
                    b.seats(prefix, taken)
                    seed += 1
    doc = {
        "brief": {
            "id": "sibling-b-movie-comedy-night",
            "title": "Sibling B-Movie Comedy Night",
            "background": (
                "You and your sibling want a so-bad-it's-good night out. It must be a cult comedy, and the "
                "lower-rated one is more fun. It has to be at the single-screen theater. Friday, March 13 or "
                "Saturday, March 14 works, Friday preferred. The show must start after 6:00 PM and end by "
                "10:00 PM, the earlier the better. You need two adjacent seats, not in the back rows."),
        },
        "workflow": {"stages": stages},
        "options": b.options(order={"date": lambda i: i, "time": lambda i: i}),
        "seatGrids": b.grids,
        "scriptedPreferences": {
            "movie": [
                {"description": "A cult comedy", "strength": "hard",
                 "constraints": [constraint("genre", "eq", "cult comedy")]},
                {"description": "The lower-rated one", "strength": "soft",
                 "objective": objective("score", "minimize")},
            ],
            "theater": [
                {"description": "The single-screen theater", "strength": "hard",
                 "constraints": [constraint("screens", "eq", 1)]},
            ],
            "date": [
                {"description": "Friday, March 13 or Saturday, March 14", "strength": "hard",
                 "constraints": [constraint("date", "inSet", ["Mar 13", "Mar 14"])]},
                {"description": "Friday preferred", "strength": "soft",
                 "objective": objective("weekday", prefer=["Friday"])},
            ],
            "time": [
                {"description": "Start after 6:00 PM and end by 10:00 PM", "strength": "hard",
                 "constraints": [predicate("startsAfter", 1080), predicate("endsBy", 1320)]},
                {"description": "The earlier the better", "strength": "soft",
                 "objective": objective("start", "minimize")},
            ],
            "seat": [
                {"description": "Two adjacent seats, not in the back rows", "strength": "hard",
                 "constraints": [predicate("adjacentSeats", 2), constraint("zone", "neq", "back")]},
            ],
        },
        "solution": ["robo-ranch", "bijou", "mar-13", "t1930-2111", "D4-D5"],
    }
    return doc


def kid_movie():
    stages = [movie_stage(extra=False), confirmation_stage()]
    b = Builder(stages)
    b.offer("movie", [], [
        movie("lantern-bakery", "Lantern Bakery", "PG", 124, "family"),
        movie("maple-detectives", "Maple Detectives", "PG-13", 118, "mystery"),
        movie("sky-circus-express", "Sky Circus Express", "PG-13", 109, "adventure"),
        movie("pocket-parade", "Pocket Parade", "PG", 92, "animation"),
    ])
    return {
        "brief": {"id": "family-matinee", "title": "Family Matinee",
                  "background": "Pick a short movie the kids can watch."},
        "workflow": {"stages": stages},
        "options": b.options(),
        "scriptedPreferences": {"movie": [
            {"description": "G or PG", "strength": "hard", "constraints": [constraint("rating", "inSet", ["G", "PG"])]},
            {"description": "The shorter one", "strength": "soft", "objective": objective("runtime", "minimize")},
        ]},
        "solution": ["pocket-parade"],
    }


def imax_theaters():
    stages = [
        {"id": "movie", "title": "Movie", "uiKind": "buttonGroup", "filterable": True,
         "attributeSpecs": [{"name": "genre", "kind": "categorical"}]},
        theater_stage(),
        confirmation_stage(),
    ]
    b = Builder(stages)
    b.offer("movie", [], [{"id": "starfall-circuit", "label": "Starfall Circuit", "attributes": {"genre": "blockbuster"}}])
    b.offer("theater", ["starfall-circuit"], [
        theater("closeup-12", "CloseUp 12", 2.1, False, 12),
        theater("riverview-8", "Riverview 8", 6.3, True, 8),
        theater("cedar-commons-6", "Cedar Commons 6", 4.6, True, 6),
    ])
    return {
        "brief": {"id": "imax-night", "title": "IMAX Night", "background": "A blockbuster on an IMAX screen, close by."},
        "workflow": {"stages": stages},
        "options": b.options(),
        "scriptedPreferences": {"theater": [
            {"description": "IMAX", "strength": "hard", "constraints": [constraint("imax", "eq", True)]},
            {"description": "Closer is better", "strength": "soft", "objective": objective("distance", "minimize")},
        ]},
        "solution": ["starfall-circuit", "cedar-commons-6"],
    }


def backtrack_example():
    """One movie, two theaters, one acceptable date, seats that never pair up."""
    stages = full_workflow()
    b = Builder(stages)
    b.offer("movie", [], [movie("quiet-harbor", "Quiet Harbor", "PG", 105, "drama", "gentle", 7.0)])
    b.offer("theater", ["quiet-harbor"], [
        theater("elm-street", "Elm Street Cinema", 1.5, False, 5),
        theater("north-point", "North Point 7", 4.0, False, 7),
    ])
    singles = {r: ("x." * 4) for r, _, _ in LAYOUT}
    for t in ("elm-street", "north-point"):
        b.offer("date", ["quiet-harbor", t], [date_item("mar-13"), date_item("mar-14")])
        for d in ("mar-13", "mar-14"):
            slot = time_item(1900 if t == "elm-street" else 2000, 105)
            b.offer("time", ["quiet-harbor", t, d], [slot])
            taken = dict(singles)
            if t == "north-point" and d == "mar-14":
                taken["B"] = "....xxxx"
            b.seats(["quiet-harbor", t, d, slot["id"]], taken)
    return {
        "brief": {"id": "backtrack-example", "title": "Backtrack Example", "background": "Four seats together on March 14."},
        "workflow": {"stages": stages},
        "options": b.options(),
        "seatGrids": b.grids,
        "scriptedPreferences": {
            "date": [{"description": "March 14 only", "strength": "hard",
                      "constraints": [constraint("date", "eq", "Mar 14")]}],
            "seat": [{"description": "Four seats together", "strength": "hard",
                      "constraints": [predicate("adjacentSeats", 4)]}],
        },
        "solution": ["quiet-harbor", "north-point", "mar-14", "t2000-2145", "B1-B4"],
    }


def invalidation():
    """IMAX is a property of the showtime; only one theater has an IMAX slot."""
    stages = [movie_stage(extra=False), theater_stage(), time_stage(imax=True), confirmation_stage()]
    stages[1]["attributeSpecs"] = [s for s in stages[1]["attributeSpecs"] if s["name"] != "imax"]
    b = Builder(stages)
    b.offer("movie", [], [
        movie("comet-run", "Comet Run", "PG-13", 120, "adventure"),
        movie("deep-current", "Deep Current", "PG", 100, "documentary"),
    ])
    th = [theater("alder", "Alder Cinema", 1.0, False, 4), theater("birch", "Birch 6", 2.0, False, 6),
          theater("cypress", "Cypress 12", 3.0, False, 12)]
    for t in th:
        del t["attributes"]["imax"]
    imax_slots = {("comet-run", "cypress")}
    for m, rt in (("comet-run", 120), ("deep-current", 100)):
        b.offer("theater", [m], th)
        for t in th:
            slots = []
            for start in (1800, 2045):
                s = time_item(start, rt)
                s["attributes"]["imax"] = (m, t["id"]) in imax_slots and start == 2045
                s["id"] += "-imax" if s["attributes"]["imax"] else ""
                slots.append(s)
            b.offer("time", [m, t["id"]], slots)
    return {
        "brief": {"id": "imax-invalidation", "title": "IMAX Invalidation", "background": "An IMAX showing, later relaxed."},
        "workflow": {"stages": stages},
        "options": b.options(),
        "scriptedPreferences": {"time": [
            {"description": "IMAX showing", "strength": "hard", "constraints": [constraint("imax", "eq", True)]},
        ]},
        "solution": ["comet-run", "cypress", "t2045-2245-imax"],
    }


def two_solution():
    doc = imax_theaters()
    doc["brief"] = {"id": "two-solutions", "title": "Two Solutions", "background": "Either IMAX theater works."}
    doc["scriptedPreferences"]["theater"] = doc["scriptedPreferences"]["theater"][:1]
    return doc


def zero_stage():
    return {"brief": {"id": "empty", "title": "Empty"}, "workflow": {"stages": []}, "options": {}, "solution": []}


def dangling_id():
    doc = imax_theaters()
    doc["options"]["theater"]["availability"][0]["ids"].append("ghost-theater")
    return doc


SCENARIOS = {
    "data/scenarios/parents-anniversary-gift.json": (parents_anniversary, True),
    "data/scenarios/sibling-b-movie-comedy-night.json": (sibling_comedy, True),
    "tests/fixtures/kid_movie.json": (kid_movie, False),
    "tests/fixtures/imax_theaters.json": (imax_theaters, False),
    "tests/fixtures/backtrack_example.json": (backtrack_example, True),
    "tests/fixtures/invalidation.json": (invalidation, True),
    "tests/fixtures/two_solutions.json": (two_solution, False),
    "tests/fixtures/zero_stage.json": (zero_stage, False),
    "tests/fixtures/dangling_id.json": (dangling_id, False),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--check", action="store_true", help="verify files on disk are current")
    args = ap.parse_args()
    stale = []
    for rel, (make, unique) in SCENARIOS.items():
        doc = make()
        if unique:
            found, total = brute_force(doc)
            want = doc["solution"]
            if found != [want]:
                sys.exit(f"{rel}: expected the single solution {want}, found {found}")
            print(f"{rel}: {total} paths, unique solution {'/'.join(want)}")
        text = json.dumps(doc, indent=2) + "\n"
        path = ROOT / rel
        if args.check:
            if not path.exists() or path.read_text() != text:
                stale.append(rel)
            continue
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    (ROOT / "tests/fixtures/malformed.json").write_text('{"workflow": {"stages": [}\n') if not args.check else None
    if stale:
        sys.exit("stale: " + ", ".join(stale))


if __name__ == "__main__":
    main()
