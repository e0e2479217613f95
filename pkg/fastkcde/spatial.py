"""kd-tree over the joint (x, y) space with per-node tight bounding boxes."""

import numpy as np
from sklearn.neighbors import NearestNeighbors


class KdNode():
    '''
    Read-only view of one node of a JointKdTree.

    Attributes
    ----------
    index : int
        Position of the node in the tree's node arrays.
    box_lo, box_hi : np.ndarray, shape (d+1,)
        Tight joint bounding box; the last coordinate is y.
    count : int
        Number of points under the node (n_r).
    point_range : (int, int)
        Half-open slot range [start, end) into the tree's point order.
    children : tuple of KdNode
        Empty for leaves, (left, right) otherwise.
    '''
    def __init__(self, tree, index):
        self.tree = tree
        self.index = int(index)
        self.box_lo = tree.node_lo[index]
        self.box_hi = tree.node_hi[index]
        self.point_range = (int(tree.node_start[index]), int(tree.node_end[index]))
        self.count = self.point_range[1] - self.point_range[0]

    @property
    def is_leaf(self):
        return self.tree.node_left[self.index] < 0

    @property
    def children(self):
        if self.is_leaf:
            return ()
        return (KdNode(self.tree, self.tree.node_left[self.index]),
                KdNode(self.tree, self.tree.node_right[self.index]))

    @property
    def indices(self):
        '''Dataset indices of the points under this node.'''
        start, end = self.point_range
        return self.tree.point_index[start:end]

    def __repr__(self):
        return f"KdNode(index={self.index}, count={self.count}, leaf={self.is_leaf})"


class JointKdTree():
    '''
    Median-split kd-tree over standardized (x, y) points.

    Nodes are stored in flat arrays so compiled traversals can walk them
    without Python objects. Points are reordered so that every node owns a
    contiguous slot range.

    Attributes
    ----------
    points : np.ndarray, shape (n, d+1)
        Joint points in tree (slot) order, y last.
    point_index : np.ndarray, shape (n,)
        point_index[slot] is the dataset index stored in that slot.
    node_lo, node_hi : np.ndarray, shape (n_nodes, d+1)
    node_start, node_end : np.ndarray, shape (n_nodes,)
    node_left, node_right : np.ndarray, shape (n_nodes,)
        Child node indices, -1 for leaves.
    leaf_size : int
    d : int
        Predictor dimension; the joint space has d+1 coordinates.
    '''
    def __init__(self, points, point_index, node_lo, node_hi, node_start, node_end,
                 node_left, node_right, leaf_size, d):
        self.points = points
        self.point_index = point_index
        self.node_lo = node_lo
        self.node_hi = node_hi
        self.node_start = node_start
        self.node_end = node_end
        self.node_left = node_left
        self.node_right = node_right
        self.leaf_size = leaf_size
        self.d = d
        self._nn_radii = None

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def n_nodes(self):
        return self.node_lo.shape[0]

    @property
    def root(self):
        return KdNode(self, 0)

    def node(self, index):
        return KdNode(self, index)

    def leaves(self):
        return [KdNode(self, i) for i in range(self.n_nodes) if self.node_left[i] < 0]

    def nn_radii(self):
        '''
        Largest nearest-neighbor distance in x and in y over all points.

        Any bandwidth at or below these radii leaves some point with no
        neighbor inside its kernel support.
        '''
        if self._nn_radii is None:
            if self.n < 2:
                self._nn_radii = (np.inf, np.inf)
            else:
                self._nn_radii = (_max_nn_distance(self.points[:, :self.d]),
                                  _max_nn_distance(self.points[:, self.d:]))
        return self._nn_radii


def _max_nn_distance(points):
    distances, _ = NearestNeighbors(n_neighbors=2).fit(points).kneighbors(points)
    return float(distances[:, 1].max())


def build(data, leaf_size=16):
    '''
    Build a JointKdTree over a StandardizedDataset.

    Each internal node splits its widest-spread coordinate at the median
    index, the lower half going left. Leaves hold at most leaf_size points.

    Parameters
    ----------
    data : StandardizedDataset or np.ndarray
        A raw (n, d+1) array is accepted with y as its last column.
    leaf_size : int, default=16

    Returns
    -------
    JointKdTree
    '''
    if isinstance(leaf_size, bool) or not isinstance(leaf_size, (int, np.integer)):
        raise TypeError(f"leaf_size must be an integer, got {leaf_size!r}")
    if leaf_size < 1:
        raise ValueError(f"leaf_size must be at least 1, got {leaf_size}")

    joint = data.joint if hasattr(data, "joint") else np.asarray(data, dtype=float)
    if joint.ndim != 2 or joint.shape[0] == 0:
        raise ValueError("cannot build a kd-tree over an empty dataset")
    n, dims = joint.shape

    order = np.arange(n)
    lo, hi, start, end, left, right = [], [], [], [], [], []

    def new_node(s, e):
        block = joint[order[s:e]]
        lo.append(block.min(axis=0))
        hi.append(block.max(axis=0))
        start.append(s)
        end.append(e)
        left.append(-1)
        right.append(-1)
        return len(lo) - 1

    stack = [new_node(0, n)]
    while stack:
        node = stack.pop()
        s, e = start[node], end[node]
        if e - s <= leaf_size:
            continue
        # duplicates still split by index so leaves respect leaf_size
        axis = int(np.argmax(hi[node] - lo[node]))
        mid = (e - s) // 2
        segment = order[s:e]
        order[s:e] = segment[np.argpartition(joint[segment, axis], mid, kind="introselect")]
        left[node] = new_node(s, s + mid)
        right[node] = new_node(s + mid, e)
        stack.append(right[node])
        stack.append(left[node])

    return JointKdTree(points=np.ascontiguousarray(joint[order]),
                       point_index=order.copy(),
                       node_lo=np.array(lo),
                       node_hi=np.array(hi),
                       node_start=np.array(start, dtype=np.int64),
                       node_end=np.array(end, dtype=np.int64),
                       node_left=np.array(left, dtype=np.int64),
                       node_right=np.array(right, dtype=np.int64),
                       leaf_size=int(leaf_size),
                       d=dims - 1)


def _box_distances(a_lo, a_hi, b_lo, b_hi):
    gap = np.maximum(0.0, np.maximum(a_lo - b_hi, b_lo - a_hi))
    span = np.maximum(np.abs(a_hi - b_lo), np.abs(b_hi - a_lo))
    return float(np.sqrt(np.sum(gap * gap))), float(np.sqrt(np.sum(span * span)))


def node_dist_x(a, b):
    '''
    (dmin, dmax) bounding the x-space Euclidean distance between any point of
    node a and any point of node b.
    '''
    d = a.tree.d
    return _box_distances(a.box_lo[:d], a.box_hi[:d], b.box_lo[:d], b.box_hi[:d])


def node_dist_y(a, b):
    '''(dmin, dmax) bounding |y_i - y_j| for i in a and j in b.'''
    d = a.tree.d
    return _box_distances(a.box_lo[d:], a.box_hi[d:], b.box_lo[d:], b.box_hi[d:])
