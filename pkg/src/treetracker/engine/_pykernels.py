"""Pure-Python probe loops for HJ and TTJ.

Both return ``(entries, failures, backjumps, deletions, dp, ng_adds, ng_hits)``
where ``entries[i]`` counts calls at step ``i`` and ``entries[n]`` counts
emitted rows. Every call below ``n`` makes exactly one hash lookup.
"""
from __future__ import annotations

BACKEND = "python"


def hj(cp, emit):
    n = cp.n
    buckets = cp.buckets
    keyfuncs = cp.keyfuncs
    assign = cp.assign
    binding = [None] * cp.n_slots
    entries = [0] * (n + 1)
    fails = [0]

    def rec(i):
        entries[i] += 1
        if i == n:
            emit(tuple(binding))
            return
        b = buckets[i].get(keyfuncs[i](binding))
        if b is None or b.live == 0:
            fails[0] += 1
            return
        asg = assign[i]
        nxt = i + 1
        for t in b.rows:
            vals = t.values
            for col, s in asg:
                binding[s] = vals[col]
            rec(nxt)

    rec(0)
    return entries, fails[0], 0, 0, 0, 0, 0


def ttj(cp, emit, ng=False, dp=False, trace=None):
    n = cp.n
    buckets = cp.buckets
    keyfuncs = cp.keyfuncs
    assign = cp.assign
    parents = cp.parents
    cyclic = cp.cyclic
    indexes = cp.indexes
    binding = [None] * cp.n_slots
    entries = [0] * (n + 1)
    # failures, backjumps, deletions, dp propagations, nogood adds, nogood hits
    cnt = [0, 0, 0, 0, 0, 0]
    nogood: dict[int, set] = {}
    root_cols = dict(cp.root_children)

    def rec(i):
        entries[i] += 1
        if i == n:
            emit(tuple(binding))
            return -1
        b = buckets[i].get(keyfuncs[i](binding))
        if b is None or b.live == 0:
            cnt[0] += 1
            p = parents[i]
            if p >= 0:
                cnt[1] += 1
                if trace is not None:
                    trace.append_backjump(i, p, "miss")
                return i
            return -1
        rows = b.rows
        alive = b.alive
        asg = assign[i]
        nxt = i + 1
        for slot in range(len(rows)):
            if not alive[slot]:
                continue
            vals = rows[slot].values
            if nogood and i == 0:
                hit = False
                for c, bad in nogood.items():
                    if tuple([vals[col] for col in root_cols[c]]) in bad:
                        hit = True
                        break
                if hit:
                    cnt[5] += 1
                    continue
            for col, s in asg:
                binding[s] = vals[col]
            res = rec(nxt)
            if res < 0:
                continue
            if parents[res] != i:
                return res
            if cyclic[res]:
                continue
            if i == 0:
                if ng and res in root_cols:
                    bad = nogood.setdefault(res, set())
                    k = keyfuncs[res](binding)
                    if k not in bad:
                        bad.add(k)
                        cnt[4] += 1
                continue
            alive[slot] = 0
            b.live -= 1
            indexes[i].deleted_count += 1
            cnt[2] += 1
            if trace is not None:
                trace.append_deletion(i, res, rows[slot])
            if dp and b.live == 0 and parents[i] >= 0:
                cnt[1] += 1
                cnt[3] += 1
                if trace is not None:
                    trace.append_backjump(i, parents[i], "dp")
                return i
        return -1

    rec(0)
    return (entries, *cnt)
