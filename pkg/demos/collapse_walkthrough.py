"""
Collapsing a finite-memory strategy to its behavioral core
==========================================================

A winning strategy can carry more memory than its behavior needs. The
collapse pass fingerprints each memory by what the play can still reach
and still visit infinitely often, merges memories with equal fingerprints,
and returns an equivalent strategy over the merged memory set.
"""

from asmp import (
    Distr,
    FiniteMemoryStrategy,
    alternating_strategy,
    bscc_mean_payoff,
    collapse,
    emit_strategy,
    fingerprints,
    product_chain,
    projection_graph,
    recurrent_classes,
    validate_strategy,
)
from asmp.gadgets import ring_pomdp

g, rewards = ring_pomdp()

# Alternating a, b, a, b, ... wins the ring: started on a cycle state it
# either walks one cycle forever or hops between them through a crossing
# only finitely often. Two memories suffice to phase the alternation.
sigma = alternating_strategy(g, 0, 1)
ok, _ = validate_strategy(g, rewards, sigma)
print("alternation wins:", ok)

# The product of model and strategy is a finite Markov chain; its bottom
# strongly connected classes decide everything about the long run.
mc = product_chain(g, rewards, sigma)
for k, cls in enumerate(recurrent_classes(mc)):
    members = ", ".join(sorted(mc.label_texts[i] for i in cls))
    print(f"recurrent class {k}: mean={bscc_mean_payoff(mc, cls)} {{{members}}}")
print()

# Fingerprints pair each (state, memory) with the set of states the play
# can still reach and the set it is bound to revisit. The projection graph
# groups memories whose fingerprints agree at every observation.
fp = fingerprints(g, rewards, sigma)
pg = projection_graph(g, sigma, fp)
print("projection vertices:", pg.n_vertices)

# Collapse rebuilds the strategy over the grouped memories. Here the two
# phases stay distinct and the initial memory splits off, so the count
# goes 2 -> 3; on strategies with redundant memories it shrinks.
collapsed = collapse(g, rewards, sigma)
print("memories before:", sigma.n_memories, "after:", collapsed.n_memories)
ok, _ = validate_strategy(g, rewards, collapsed)
print("collapsed strategy still wins:", ok)
print()

# A deliberately wasteful strategy: after each a it flips into one of four
# interchangeable copies of the b-phase. The copies behave identically, so
# their fingerprints agree and collapse folds them into a single memory.
copies = list(range(1, 5))
update = {(0, o, 0): Distr.uniform(copies) for o in range(g.n_observations)}
for m in copies:
    for o in range(g.n_observations):
        update[(m, o, 1)] = Distr.dirac(0)
wasteful = FiniteMemoryStrategy(
    memories=["a", "b0", "b1", "b2", "b3"],
    next_action=[sigma.next_action[0]] + [sigma.next_action[1]] * 4,
    update=update,
    initial=0,
)
ok, _ = validate_strategy(g, rewards, wasteful)
print("wasteful five-memory alternation wins:", ok)
slim = collapse(g, rewards, wasteful)
print("memories before:", wasteful.n_memories, "after:", slim.n_memories)
print()

# The collapsed strategy serializes like any other.
print(emit_strategy(slim, g))
