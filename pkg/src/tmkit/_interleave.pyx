# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled interleaving search; same contract as ``tmkit._interleave_py``."""

from libc.stdlib cimport malloc, calloc, free


cdef int* _ints(object seq) except NULL:
    cdef Py_ssize_t n = len(seq)
    cdef int* out = <int*> malloc((n + 1) * sizeof(int))
    if out == NULL:
        raise MemoryError()
    cdef Py_ssize_t i
    for i in range(n):
        out[i] = seq[i]
    return out


cdef class _Search:
    cdef int n_stages, n_kinds, n_spawn, budget, depth, n_inst
    cdef int *cand_start
    cdef int *cand_end
    cdef int *cand_target
    cdef int *cand_cross
    cdef int *trig_start
    cdef int *trig_end
    cdef int *trig_target
    cdef int *trig_create
    cdef int *created
    cdef int *gated
    cdef int *reject
    cdef int *spawn_stage
    cdef int *used
    cdef int *counter
    cdef int *permits
    cdef int *pending
    cdef int *inst_stage
    cdef int *inst_kind
    cdef int *inst_mode
    cdef int *inst_num
    cdef int *seq_stage
    cdef int *seq_kind
    cdef int *seq_num
    cdef public bint exceeded
    cdef public set results

    def __cinit__(self, net, spawn_stages, int budget):
        self.n_stages = len(net.stages)
        self.n_kinds = len(net.kinds)
        self.n_spawn = len(spawn_stages)
        self.budget = budget
        self.depth = 0
        self.n_inst = 0
        self.exceeded = False
        self.results = set()
        self.cand_start = _ints(net.cand_start)
        self.cand_end = _ints(net.cand_end)
        self.cand_target = _ints(net.cand_target)
        self.cand_cross = _ints(net.cand_cross)
        self.trig_start = _ints(net.trig_start)
        self.trig_end = _ints(net.trig_end)
        self.trig_target = _ints(net.trig_target)
        self.trig_create = _ints(net.trig_create)
        self.created = _ints(net.created)
        self.gated = _ints(net.gated)
        self.reject = _ints(net.reject)
        self.spawn_stage = _ints(list(spawn_stages))
        self.used = <int*> calloc(self.n_spawn + 1, sizeof(int))
        self.counter = <int*> calloc(self.n_kinds + 1, sizeof(int))
        self.permits = <int*> calloc(self.n_stages + 1, sizeof(int))
        self.pending = <int*> calloc(self.n_stages + 1, sizeof(int))
        # each firing creates at most one instance
        self.inst_stage = <int*> calloc(budget + 1, sizeof(int))
        self.inst_kind = <int*> calloc(budget + 1, sizeof(int))
        self.inst_mode = <int*> calloc(budget + 1, sizeof(int))
        self.inst_num = <int*> calloc(budget + 1, sizeof(int))
        self.seq_stage = <int*> calloc(budget + 1, sizeof(int))
        self.seq_kind = <int*> calloc(budget + 1, sizeof(int))
        self.seq_num = <int*> calloc(budget + 1, sizeof(int))
        if (self.used == NULL or self.counter == NULL or self.permits == NULL
                or self.pending == NULL or self.inst_stage == NULL
                or self.inst_kind == NULL or self.inst_mode == NULL
                or self.inst_num == NULL or self.seq_stage == NULL
                or self.seq_kind == NULL or self.seq_num == NULL):
            raise MemoryError()

    def __dealloc__(self):
        free(self.cand_start); free(self.cand_end)
        free(self.cand_target); free(self.cand_cross)
        free(self.trig_start); free(self.trig_end)
        free(self.trig_target); free(self.trig_create)
        free(self.created); free(self.gated); free(self.reject)
        free(self.spawn_stage); free(self.used); free(self.counter)
        free(self.permits); free(self.pending)
        free(self.inst_stage); free(self.inst_kind)
        free(self.inst_mode); free(self.inst_num)
        free(self.seq_stage); free(self.seq_kind); free(self.seq_num)

    cdef inline void add_triggers(self, int s, int sign):
        cdef int j
        for j in range(self.trig_start[s], self.trig_end[s]):
            if self.trig_create[j]:
                self.pending[self.trig_target[j]] += sign
            else:
                self.permits[self.trig_target[j]] += sign

    cdef inline bint open_gate(self, int c):
        cdef int t = self.cand_target[c]
        return not (self.cand_cross[c] and self.gated[t] and self.permits[t] == 0)

    cdef inline bint spawn_first(self, int i):
        cdef int j
        cdef int s = self.spawn_stage[i]
        for j in range(i):
            if not self.used[j] and self.spawn_stage[j] == s:
                return False
        return True

    cdef bint has_option(self):
        cdef int i, s, slot, c
        for i in range(self.n_spawn):
            if not self.used[i]:
                return True
        for s in range(self.n_stages):
            if self.pending[s]:
                return True
        for i in range(self.n_inst):
            s = self.inst_stage[i]
            if self.reject[s]:
                continue
            slot = (s * self.n_kinds + self.inst_kind[i]) * 2 + self.inst_mode[i]
            for c in range(self.cand_start[slot], self.cand_end[slot]):
                if self.open_gate(c):
                    return True
        return False

    cdef void push(self, int s, int k, int n):
        self.seq_stage[self.depth] = s
        self.seq_kind[self.depth] = k
        self.seq_num[self.depth] = n
        self.depth += 1

    cdef void create(self, int s):
        cdef int k = self.created[s]
        self.counter[k] += 1
        self.inst_stage[self.n_inst] = s
        self.inst_kind[self.n_inst] = k
        self.inst_mode[self.n_inst] = 0
        self.inst_num[self.n_inst] = self.counter[k]
        self.n_inst += 1
        self.push(s, k, self.counter[k])
        self.add_triggers(s, 1)

    cdef void uncreate(self, int s):
        self.add_triggers(s, -1)
        self.depth -= 1
        self.n_inst -= 1
        self.counter[self.created[s]] -= 1

    cdef emit(self):
        cdef int i
        self.results.add(tuple([
            (self.seq_stage[i], self.seq_kind[i], self.seq_num[i])
            for i in range(self.depth)
        ]))

    cdef dfs(self):
        cdef int i, s, k, mode, slot, c, t, cross, n_inst
        cdef bint moved = False, gate
        if self.depth == self.budget:
            if self.has_option():
                self.exceeded = True
            self.emit()
            return
        for i in range(self.n_spawn):
            if self.used[i] or not self.spawn_first(i):
                continue
            moved = True
            self.used[i] = 1
            self.create(self.spawn_stage[i])
            self.dfs()
            self.uncreate(self.spawn_stage[i])
            self.used[i] = 0
        for s in range(self.n_stages):
            if self.pending[s]:
                moved = True
                self.pending[s] -= 1
                self.create(s)
                self.dfs()
                self.uncreate(s)
                self.pending[s] += 1
        n_inst = self.n_inst
        for i in range(n_inst):
            s = self.inst_stage[i]
            if self.reject[s]:
                continue
            k = self.inst_kind[i]
            mode = self.inst_mode[i]
            slot = (s * self.n_kinds + k) * 2 + mode
            for c in range(self.cand_start[slot], self.cand_end[slot]):
                if not self.open_gate(c):
                    continue
                t = self.cand_target[c]
                cross = self.cand_cross[c]
                gate = cross and self.gated[t]
                if gate:
                    self.permits[t] -= 1
                moved = True
                self.inst_stage[i] = t
                self.inst_mode[i] = cross
                self.push(t, k, self.inst_num[i])
                self.add_triggers(t, 1)
                self.dfs()
                self.add_triggers(t, -1)
                self.depth -= 1
                self.inst_stage[i] = s
                self.inst_mode[i] = mode
                if gate:
                    self.permits[t] += 1
        if not moved:
            self.emit()

    def run(self):
        if self.budget > 0:
            self.dfs()
        else:
            self.exceeded = self.n_spawn > 0
            self.results.add(())
        return self.results, self.exceeded


def enumerate_encoded(net, spawn_stages, int budget):
    """Return ``(sequences, exceeded)``; see the pure-Python version."""
    return _Search(net, spawn_stages, budget).run()
