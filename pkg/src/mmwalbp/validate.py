"""Independent feasibility checker for exported solutions.

Works from the raw manifest and solution dictionaries only and shares no
feasibility logic with the decoder, so it can serve as an oracle for it.
"""
from __future__ import annotations

import math

EPS = 1e-6


def _reachability(n: int, edges) -> list[set[int]]:
    succ = {i: [] for i in range(1, n + 1)}
    for a, b in edges:
        succ[a].append(b)
    reach = []
    for s in range(1, n + 1):
        seen, stack = set(), list(succ[s])
        while stack:
            v = stack.pop()
            if v not in seen:
                seen.add(v)
                stack.extend(succ[v])
        reach.append(seen)
    return reach


def validate_solution(solution: dict, manifest: dict) -> list[str]:
    """Return a list of human-readable violations (empty when the solution is feasible)."""
    problems: list[str] = []
    C = float(manifest["cycle_time"])
    kmax = int(manifest.get("max_workplaces", 3))
    tasks = {int(t["id"]): (float(t["time"]), int(t["zone"])) for t in manifest["tasks"]}
    n = len(tasks)
    cost = manifest["displacement"]
    mode = solution.get("displacement_mode", "home")

    seen: dict[int, tuple[int, float, float]] = {}
    m = 0
    loads = []
    for s_idx, station in enumerate(solution.get("workstations", [])):
        wps = station.get("workplaces", [])
        if len(wps) > kmax:
            problems.append(f"workstation {s_idx + 1} has {len(wps)} workplaces, max is {kmax}")
        zones_used = [wp["zone"] for wp in wps]
        if len(set(zones_used)) != len(zones_used):
            problems.append(f"workstation {s_idx + 1} opens the same zone twice")
        for wp in wps:
            home = int(wp["zone"])
            entries = wp.get("tasks", [])
            if not entries:
                problems.append(f"workstation {s_idx + 1}: empty workplace at zone {home} listed")
                continue
            m += 1
            clock, load, idle, last_zone = 0.0, 0.0, 0.0, home
            for entry in entries:
                tid = int(entry["task_id"])
                start, end = float(entry["start"]), float(entry["end"])
                dur = float(entry["corrected_duration"])
                if tid not in tasks:
                    problems.append(f"unknown task {tid}")
                    continue
                if tid in seen:
                    problems.append(f"task {tid} scheduled more than once")
                seen[tid] = (s_idx, start, end)
                base, zone = tasks[tid]
                origin = home if mode == "home" else last_zone
                expected = base + float(cost[origin][zone])
                if abs(dur - expected) > EPS:
                    problems.append(f"task {tid}: duration {dur} but base+displacement is {expected}")
                if abs(end - start - dur) > EPS:
                    problems.append(f"task {tid}: end - start != corrected duration")
                if start < -EPS or end > C + EPS:
                    problems.append(f"task {tid}: [{start}, {end}] outside the cycle [0, {C}]")
                if start < clock - EPS:
                    problems.append(f"task {tid} overlaps the previous task of its workplace")
                idle += max(start - clock, 0.0)
                clock = end
                load += dur
                last_zone = zone
            loads.append(load)
            if "workload" in wp and abs(float(wp["workload"]) - load) > EPS:
                problems.append(f"workstation {s_idx + 1} zone {home}: workload {wp['workload']} != {load}")
            if "idle" in wp and abs(float(wp["idle"]) - idle) > EPS:
                problems.append(f"workstation {s_idx + 1} zone {home}: idle {wp['idle']} != {idle}")

    missing = sorted(set(tasks) - set(seen))
    if missing:
        problems.append(f"tasks never scheduled: {missing[:20]}")

    reach = _reachability(n, manifest["edges"])
    for i in range(1, n + 1):
        if i not in seen:
            continue
        si, _, end_i = seen[i]
        for j in reach[i - 1]:
            if j not in seen:
                continue
            sj, start_j, _ = seen[j]
            if si > sj:
                problems.append(f"precedence {i}->{j} violated: station {si + 1} after {sj + 1}")
            elif si == sj and end_i > start_j + EPS:
                problems.append(f"precedence {i}->{j} violated: task {j} starts at {start_j} before {i} ends at {end_i}")

    if "open_workplaces" in solution and int(solution["open_workplaces"]) != m:
        problems.append(f"open_workplaces is {solution['open_workplaces']} but {m} workplaces hold tasks")
    total = sum(base for base, _ in tasks.values())
    lower = math.ceil(total / C - 1e-9) if tasks else 0
    if m < lower:
        problems.append(f"{m} open workplaces is below the lower bound {lower}")
    if "total_workload" in solution and abs(float(solution["total_workload"]) - sum(loads)) > EPS * max(1, n):
        problems.append("total_workload does not match the scheduled durations")
    if "fitness" in solution and loads:
        expected = m * math.sqrt(sum((C - t) ** 2 for t in loads))
        if abs(float(solution["fitness"]) - expected) > 1e-6 * max(1.0, expected):
            problems.append(f"fitness {solution['fitness']} != recomputed {expected}")
    return problems
