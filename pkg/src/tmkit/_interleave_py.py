"""Pure-Python interleaving search (fallback for the compiled kernel).

Enumerates every firing sequence allowed by flows, triggers and transfer gates,
ignoring ticks and the simulator's tie-break. Sequences are tuples of
``(stage, kind, number)`` triples. The search backtracks over one mutable
state instead of copying it per branch.
"""


def enumerate_encoded(net, spawn_stages, budget):
    """Return ``(sequences, exceeded)``.

    ``exceeded`` is True when some execution had more than ``budget``
    firings; such executions contribute their ``budget``-long prefix.
    """
    cand_start = net.cand_start
    cand_end = net.cand_end
    cand_target = net.cand_target
    cand_cross = net.cand_cross
    trig_start = net.trig_start
    trig_end = net.trig_end
    trig_target = net.trig_target
    trig_create = net.trig_create
    created = net.created
    gated = net.gated
    reject = net.reject
    n_stages = len(net.stages)
    n_kinds = len(net.kinds)
    spawn_stages = list(spawn_stages)
    n_spawn = len(spawn_stages)

    inst_stage = []
    inst_kind = []
    inst_mode = []
    inst_num = []
    counter = [0] * n_kinds
    permits = [0] * n_stages
    pending = [0] * n_stages
    used = [False] * n_spawn
    seq = []
    results = set()
    exceeded = False

    def add_triggers(s, sign):
        for j in range(trig_start[s], trig_end[s]):
            if trig_create[j]:
                pending[trig_target[j]] += sign
            else:
                permits[trig_target[j]] += sign

    def spawn_first(i):
        # identical pending spawns are interchangeable; branch on the first only
        s = spawn_stages[i]
        for j in range(i):
            if not used[j] and spawn_stages[j] == s:
                return False
        return True

    def open_gate(c):
        t = cand_target[c]
        return not (cand_cross[c] and gated[t] and permits[t] == 0)

    def has_option():
        if not all(used) or any(pending):
            return True
        for i in range(len(inst_stage)):
            s = inst_stage[i]
            if reject[s]:
                continue
            slot = (s * n_kinds + inst_kind[i]) * 2 + inst_mode[i]
            for c in range(cand_start[slot], cand_end[slot]):
                if open_gate(c):
                    return True
        return False

    def create(s):
        k = created[s]
        counter[k] += 1
        inst_stage.append(s)
        inst_kind.append(k)
        inst_mode.append(0)
        inst_num.append(counter[k])
        seq.append((s, k, counter[k]))
        add_triggers(s, 1)

    def uncreate(s):
        add_triggers(s, -1)
        seq.pop()
        inst_stage.pop()
        inst_kind.pop()
        inst_mode.pop()
        inst_num.pop()
        counter[created[s]] -= 1

    def dfs():
        nonlocal exceeded
        if len(seq) == budget:
            if has_option():
                exceeded = True
            results.add(tuple(seq))
            return
        moved = False
        for i in range(n_spawn):
            if used[i] or not spawn_first(i):
                continue
            moved = True
            used[i] = True
            create(spawn_stages[i])
            dfs()
            uncreate(spawn_stages[i])
            used[i] = False
        for s in range(n_stages):
            if pending[s]:
                moved = True
                pending[s] -= 1
                create(s)
                dfs()
                uncreate(s)
                pending[s] += 1
        for i in range(len(inst_stage)):
            s = inst_stage[i]
            if reject[s]:
                continue
            k = inst_kind[i]
            mode = inst_mode[i]
            slot = (s * n_kinds + k) * 2 + mode
            for c in range(cand_start[slot], cand_end[slot]):
                if not open_gate(c):
                    continue
                t = cand_target[c]
                cross = cand_cross[c]
                gate = cross and gated[t]
                if gate:
                    permits[t] -= 1
                moved = True
                inst_stage[i] = t
                inst_mode[i] = cross
                seq.append((t, k, inst_num[i]))
                add_triggers(t, 1)
                dfs()
                add_triggers(t, -1)
                seq.pop()
                inst_stage[i] = s
                inst_mode[i] = mode
                if gate:
                    permits[t] += 1
        if not moved:
            results.add(tuple(seq))

    if budget > 0:
        dfs()
    else:
        exceeded = bool(spawn_stages)
        results.add(())
    return results, exceeded
