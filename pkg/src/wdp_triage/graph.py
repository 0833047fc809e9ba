"""Conversions between winner determination and weighted independent set.

With unit capacities and unit demands a set of bids is feasible exactly
when no two of them share an item, so the bid conflict graph carries the
same optimum as the auction.
"""

from itertools import combinations

from wdp_triage.models import Bid, Item, MwisInstance, WdpInstance, require_valid_mwis


def conflict_graph(instance: WdpInstance) -> MwisInstance:
    """Build the bid conflict graph.

    Node i is the bid at list position i with weight v_i; (i, j) is an edge
    iff the two bids share at least one item. Defined for any instance, but
    the optima only coincide when every capacity and demand is 1.
    """
    bids_on_item: dict[int, list[int]] = {}
    for pos, bid in enumerate(instance.bids):
        for e in bid.items:
            bids_on_item.setdefault(e, []).append(pos)

    edges: set[tuple[int, int]] = set()
    for positions in bids_on_item.values():
        for i, j in combinations(positions, 2):
            edges.add((min(i, j), max(i, j)))

    return MwisInstance(
        weights=tuple(bid.value for bid in instance.bids),
        edges=tuple(sorted(edges)),
    )


def mwis_to_wdp(mwis: MwisInstance, name: str = "mwis", seed: int = 0) -> WdpInstance:
    """Turn a weighted graph into a unit-capacity auction.

    Every node becomes a bid with v_i = w_i and c_i = 1. Every edge (i, j)
    becomes a unit-capacity virtual item requested by both endpoints.
    Isolated nodes get one private unit item so no item set is empty.

    Raises:
        InvalidInstanceError: If weights are not positive or an edge is malformed
    """
    require_valid_mwis(mwis)
    node_items: list[list[int]] = [[] for _ in range(mwis.n)]
    items: list[Item] = []

    for i, j in mwis.edges:
        item_id = len(items)
        items.append(Item(id=item_id, capacity=1.0))
        node_items[i].append(item_id)
        node_items[j].append(item_id)

    for node in range(mwis.n):
        if not node_items[node]:
            item_id = len(items)
            items.append(Item(id=item_id, capacity=1.0))
            node_items[node].append(item_id)

    bids = tuple(
        Bid(id=node, value=weight, items=tuple(node_items[node]), demand=1.0)
        for node, weight in enumerate(mwis.weights)
    )
    return WdpInstance(items=tuple(items), bids=bids, name=name, seed=seed)
