# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled probe loops for HJ and TTJ; same contract as ``_pykernels``."""

BACKEND = "cython"


cdef inline tuple _key(list binding, tuple slots):
    cdef Py_ssize_t nk = len(slots)
    cdef Py_ssize_t j
    if nk == 0:
        return ()
    if nk == 1:
        return (binding[<Py_ssize_t>slots[0]],)
    cdef list out = [None] * nk
    for j in range(nk):
        out[j] = binding[<Py_ssize_t>slots[j]]
    return tuple(out)


cdef class _Runner:
    cdef Py_ssize_t n
    cdef list buckets
    cdef list key_slots
    cdef list assign
    cdef list parents_l
    cdef list cyclic_l
    cdef list indexes
    cdef list binding
    cdef list entries
    cdef object emit
    cdef object trace
    cdef bint ng
    cdef bint dp
    cdef dict nogood
    cdef dict root_cols
    cdef public long long fails, backjumps, deletions, dps, ng_adds, ng_hits

    def __init__(self, cp, emit, bint ng=False, bint dp=False, trace=None):
        self.n = cp.n
        self.buckets = cp.buckets
        self.key_slots = cp.key_slots
        self.assign = cp.assign
        self.parents_l = cp.parents
        self.cyclic_l = cp.cyclic
        self.indexes = cp.indexes
        self.binding = [None] * cp.n_slots
        self.entries = [0] * (cp.n + 1)
        self.emit = emit
        self.trace = trace
        self.ng = ng
        self.dp = dp
        self.nogood = {}
        self.root_cols = dict(cp.root_children)
        self.fails = self.backjumps = self.deletions = 0
        self.dps = self.ng_adds = self.ng_hits = 0

    cdef void hj(self, Py_ssize_t i):
        cdef list binding = self.binding
        self.entries[i] += 1
        if i == self.n:
            self.emit(tuple(binding))
            return
        b = (<dict>self.buckets[i]).get(_key(binding, <tuple>self.key_slots[i]))
        if b is None or b.live == 0:
            self.fails += 1
            return
        cdef tuple asg = <tuple>self.assign[i]
        cdef tuple vals
        cdef tuple pair
        for t in <list>b.rows:
            vals = <tuple>t.values
            for pair in asg:
                binding[<Py_ssize_t>pair[1]] = vals[<Py_ssize_t>pair[0]]
            self.hj(i + 1)

    cdef Py_ssize_t ttj(self, Py_ssize_t i):
        cdef list binding = self.binding
        cdef Py_ssize_t p, slot, nrows, res
        cdef bint hit
        self.entries[i] += 1
        if i == self.n:
            self.emit(tuple(binding))
            return -1
        b = (<dict>self.buckets[i]).get(_key(binding, <tuple>self.key_slots[i]))
        if b is None or b.live == 0:
            self.fails += 1
            p = <Py_ssize_t>self.parents_l[i]
            if p >= 0:
                self.backjumps += 1
                if self.trace is not None:
                    self.trace.append_backjump(i, p, "miss")
                return i
            return -1
        cdef list rows = <list>b.rows
        cdef bytearray alive = <bytearray>b.alive
        cdef tuple asg = <tuple>self.assign[i]
        cdef tuple vals
        cdef tuple pair
        nrows = len(rows)
        for slot in range(nrows):
            if not alive[slot]:
                continue
            vals = <tuple>(rows[slot].values)
            if i == 0 and self.nogood:
                hit = False
                for c, bad in self.nogood.items():
                    if tuple([vals[<Py_ssize_t>col] for col in self.root_cols[c]]) in bad:
                        hit = True
                        break
                if hit:
                    self.ng_hits += 1
                    continue
            for pair in asg:
                binding[<Py_ssize_t>pair[1]] = vals[<Py_ssize_t>pair[0]]
            res = self.ttj(i + 1)
            if res < 0:
                continue
            if <Py_ssize_t>self.parents_l[res] != i:
                return res
            if self.cyclic_l[res]:
                continue
            if i == 0:
                if self.ng and res in self.root_cols:
                    bad = self.nogood.setdefault(res, set())
                    k = _key(binding, <tuple>self.key_slots[res])
                    if k not in bad:
                        bad.add(k)
                        self.ng_adds += 1
                continue
            alive[slot] = 0
            b.live -= 1
            self.indexes[i].deleted_count += 1
            self.deletions += 1
            if self.trace is not None:
                self.trace.append_deletion(i, res, rows[slot])
            if self.dp and b.live == 0 and <Py_ssize_t>self.parents_l[i] >= 0:
                self.backjumps += 1
                self.dps += 1
                if self.trace is not None:
                    self.trace.append_backjump(i, self.parents_l[i], "dp")
                return i
        return -1

    def result(self):
        return (self.entries, self.fails, self.backjumps, self.deletions,
                self.dps, self.ng_adds, self.ng_hits)


def hj(cp, emit):
    r = _Runner(cp, emit)
    r.hj(0)
    return r.result()


def ttj(cp, emit, ng=False, dp=False, trace=None):
    r = _Runner(cp, emit, ng, dp, trace)
    r.ttj(0)
    return r.result()
