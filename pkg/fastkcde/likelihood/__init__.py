from .base import *
from .naive import naive_loglik
from .pruning import can_approx_det, det_prune_rule, estimate_rel_error
from .dualtree import dualtree_loglik_det, dualtree_loglik_prob, evaluate_loglik, warmup
