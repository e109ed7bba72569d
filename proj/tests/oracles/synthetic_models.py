"""Reference evaluation of the synthetic cost models, straight from the fixture
documents. Independent of the C++ implementation; used to produce the golden
observations pinned in the tests and to brute-force the small spaces.

    python3 tests/oracles/synthetic_models.py golden
    python3 tests/oracles/synthetic_models.py optimum dram-small stream low-latency
"""

import itertools
import json
import math
import os
import sys

DATA = os.path.join(os.path.dirname(__file__), "..", "..", "data", "envs")


def load(name):
    with open(os.path.join(DATA, name + ".json")) as f:
        return json.load(f)


def grid(p):
    if p["kind"] == "categorical":
        return list(p["values"])
    n = int(math.floor((p["max"] - p["min"]) / p["step"] + 1e-9)) + 1
    return [p["min"] + k * p["step"] for k in range(n)]


def points(doc, variant):
    params = doc["spaces"][variant]["parameters"]
    names = [p["name"] for p in params]
    for combo in itertools.product(*[grid(p) for p in params]):
        yield dict(zip(names, combo))


def full_design(doc, design):
    d = dict(doc["defaults"])
    d.update(design)
    return d


def workload(doc, wid):
    for w in doc["workloads"]:
        if w["id"] == wid:
            return w
    raise KeyError(wid)


def dram(doc, design, wl):
    d = full_design(doc, design)
    m = doc["model"]
    t = wl["traits"]
    loc, rd = t["locality_fraction"], t["read_fraction"]
    lat = t["base_latency_s"]
    pw = t["base_power_w"]
    for name in ["PagePolicy", "Scheduler", "SchedulerBuffer", "RespQueue", "Arbiter"]:
        e = m["categorical"][name][d[name]]
        ls = e.get("locality_sensitivity", 0.0)
        rs = e.get("read_sensitivity", 0.0)
        lat *= e["latency"] * (1.0 + ls * (0.5 - loc)) * (1.0 + rs * (0.5 - rd))
        pw *= e["power"]
    rb = m["request_buffer"]
    n = float(d["RequestBufferSize"])
    qw = rb["queue_weight"][d["Scheduler"]]
    share = rb["buffer_share"][d["SchedulerBuffer"]]
    lat *= 1.0 + qw / (n * share) + rb["lookup_weight"] * n
    pw *= 1.0 + rb["power_per_entry"] * n
    slots = float(d["RefreshMaxPostponed"]) + float(d["RefreshMaxPulledin"])
    lat *= 1.0 + m["refresh"]["stall_weight"] / slots
    pw *= 1.0 + m["refresh"]["power_per_slot"] * slots
    ma = m["max_active"]
    mt = float(d["MaxActiveTransactions"])
    lat *= 1.0 + ma["queue_weight"] / mt + ma["overhead"] * mt
    pw *= 1.0 + ma["power_per_transaction"] * mt
    return {"latency": lat, "power": pw, "energy": lat * pw}


def accel(doc, design, wl):
    d = full_design(doc, design)
    m = doc["model"]
    t = wl["traits"]
    pes = float(d["NumPEs"])
    glb = float(d["GlobalBufferKB"])
    w, i, a = float(d["WeightSPadWords"]), float(d["InputSPadWords"]), float(d["AccumSPadWords"])
    df = m["dataflow"][d["Dataflow"]]
    clk = float(d["ClockMHz"]) * 1e6
    bw = float(d["DramBandwidthGBs"]) * 1e9
    buffer_bytes = glb * 1024.0 + pes * (w + i + a) * m["word_bytes"]
    if buffer_bytes > m["on_chip_budget_kb"] * 1024.0:
        return None
    compute = t["flops"] / (pes * m["ops_per_pe_cycle"] * df["utilization"] * clk)
    traffic = (t["bytes"] * (1.0 + t["working_set_kb"] / glb) * (1.0 + df["weight_reuse_words"] / w)
               * (1.0 + m["spad_reuse"]["input_words"] / i) * (1.0 + m["spad_reuse"]["accum_words"] / a))
    memory = traffic / bw
    lat = max(compute, memory)
    ar = m["area"]
    area = ar["base"] + ar["per_pe"] * pes + ar["per_glb_kb"] * glb + ar["per_spad_word"] * (w + i + a) * pes + df["area"]
    energy = t["flops"] * df["energy_per_op"] + traffic * m["dram_energy_per_byte"] + m["leakage_w_per_mm2"] * area * lat
    return {"latency": lat, "energy": energy, "area": area}


def soc(doc, design, wl):
    d = full_design(doc, design)
    m = doc["model"]
    slots = []
    for k in range(8):
        v = d.get("PE%d" % k, "None")
        if v != "None":
            slots.append(m["pe_types"][v])
    if not slots:
        return None
    width = float(d["NocBusWidth"])
    link = width / 8.0 * m["noc_clock_hz"]
    free = [0.0] * len(slots)
    finish, where = {}, {}
    tasks = wl["tasks"]
    for task in tasks:
        best = None
        for p, pe in enumerate(slots):
            ready = 0.0
            for dep in task["deps"]:
                arrive = finish[dep]
                if where[dep] != p:
                    arrive += by_name(tasks, dep)["out_bytes"] / link
                ready = max(ready, arrive)
            start = max(ready, free[p])
            fin = start + task["work"] / pe["rates"][task["kind"]]
            if best is None or fin < best[0]:
                best = (fin, p)
        finish[task["name"]] = best[0]
        where[task["name"]] = best[1]
        free[best[1]] = best[0]
    makespan = max(finish.values())
    power = m["base_power"]
    area = m["base_area"]
    for pe in slots:
        power += pe["power"]
    for pe in slots:
        area += pe["area"]
    power += m["noc_power_per_bit"] * width
    area += m["noc_area_per_bit"] * width
    return {"power": power, "performance": makespan, "area": area}


def by_name(tasks, name):
    for t in tasks:
        if t["name"] == name:
            return t
    raise KeyError(name)


MODELS = {"dram": dram, "accel": accel, "soc": soc}


def target_reward(target, obs, cap=1e9):
    gap = abs(target - obs)
    if gap < target / cap:
        return cap
    return min(cap, target / gap)


def score(spec, obs):
    if obs is None:
        return 0.0
    if spec["mode"] == "target_proximity":
        rs = [target_reward(t["target"], obs[t["metric"]], spec.get("cap", 1e9)) for t in spec["targets"]]
        prod = 1.0
        for r in rs:
            prod *= r
        if len(rs) == 1:
            return rs[0]
        if len(rs) == 2:
            return math.sqrt(prod)
        return prod ** (1.0 / len(rs))
    if spec["mode"] == "budget_distance":
        dist = 0.0
        for b in spec["budgets"]:
            dist += b.get("weight", 1.0) * (obs[b["metric"]] - b["budget"]) / b["budget"]
        return 0.0 - dist
    if spec["mode"] == "reciprocal":
        return 1.0 / obs[spec["metric"]]
    raise ValueError(spec["mode"])


def optimum(env_id, wid, objective):
    name, _, variant = env_id.partition("-")
    variant = variant or "full"
    doc = load(name)
    wl = workload(doc, wid)
    spec = wl["objectives"][objective]
    best = None
    count = 0
    for design in points(doc, variant):
        r = score(spec, MODELS[name](doc, design, wl))
        count += 1
        if best is None or r > best[0]:
            best = (r, design)
    return best, count


def golden():
    out = {}
    for name in MODELS:
        doc = load(name)
        for wl in doc["workloads"]:
            out["%s/%s" % (name, wl["id"])] = MODELS[name](doc, doc["reference_design"], wl)
    return out


if __name__ == "__main__":
    cmd = sys.argv[1]
    if cmd == "golden":
        for key, obs in golden().items():
            print(key, json.dumps({k: repr(v) for k, v in obs.items()} if obs else None))
    elif cmd == "optimum":
        (r, design), n = optimum(sys.argv[2], sys.argv[3], sys.argv[4])
        print(repr(r), n, json.dumps(design))
    else:
        raise SystemExit("unknown command")
