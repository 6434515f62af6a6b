import math
import random

from hypothesis import given, settings
from hypothesis import strategies as st

from patentprune.ltr import lambda_gradients, ndcg


def swap_delta_ndcg(scores, labels, i, j, k):
    """Oracle |dNDCG| for swapping items i and j in the score ranking."""
    order = sorted(range(len(scores)), key=lambda t: (-scores[t], t))
    ranked = [labels[t] for t in order]
    base = ndcg(ranked, k)
    pi, pj = order.index(i), order.index(j)
    ranked[pi], ranked[pj] = ranked[pj], ranked[pi]
    return abs(ndcg(ranked, k) - base)


class TestLambdaGradients:
    def test_equal_labels_all_zero(self):
        grads, hess = lambda_gradients([0.3, -0.2, 0.8], [2, 2, 2], 10)
        assert grads == [0.0, 0.0, 0.0]
        assert hess == [0.0, 0.0, 0.0]

    def test_saturated_pair_vanishes(self):
        grads, _ = lambda_gradients([60.0, -60.0], [1, 0], 10, sigma=1.0)
        assert abs(grads[0]) < 1e-20
        assert abs(grads[1]) < 1e-20

    def test_two_item_closed_form(self):
        grads, hess = lambda_gradients([0.0, 0.0], [1, 0], 2, sigma=1.0)
        delta = swap_delta_ndcg([0.0, 0.0], [1, 0], 0, 1, 2)
        assert math.isclose(grads[0], -0.5 * delta, rel_tol=1e-9)
        assert grads[1] == -grads[0]
        # hessian at rho = 0.5: sigma^2 * delta * 0.25
        assert math.isclose(hess[0], 0.25 * delta, rel_tol=1e-9)

    def test_group_sum_exact_zero_random(self):
        rng = random.Random(99)
        for _ in range(200):
            n = rng.randint(2, 25)
            scores = [rng.uniform(-3, 3) for _ in range(n)]
            labels = [rng.randint(0, 4) for _ in range(n)]
            grads, hess = lambda_gradients(scores, labels, 10)
            assert sum(grads) == 0.0
            assert all(h >= 0.0 for h in hess)

    @settings(max_examples=60)
    @given(
        st.lists(st.floats(min_value=-5, max_value=5), min_size=2, max_size=12),
        st.randoms(use_true_random=False),
    )
    def test_group_sum_exact_zero_property(self, scores, rnd):
        labels = [rnd.randint(0, 4) for _ in scores]
        grads, _ = lambda_gradients(scores, labels, 10)
        assert sum(grads) == 0.0

    def test_two_item_matches_finite_difference(self):
        """Analytic lambda vs central difference of the pairwise surrogate
        |dNDCG| * log(1 + exp(-sigma (s_i - s_j))) across random cases."""
        rng = random.Random(12345)
        eps = 1e-6
        for _ in range(100):
            s = [rng.uniform(-2, 2), rng.uniform(-2, 2)]
            hi = rng.randint(1, 4)
            lo = rng.randint(0, hi - 1)
            labels = [hi, lo]
            sigma = rng.choice([0.5, 1.0, 2.0])
            grads, _ = lambda_gradients(s, labels, 2, sigma=sigma)
            delta = swap_delta_ndcg(s, labels, 0, 1, 2)

            def cost(s0):
                return delta * math.log1p(math.exp(-sigma * (s0 - s[1])))

            fd = (cost(s[0] + eps) - cost(s[0] - eps)) / (2 * eps)
            assert math.isclose(grads[0], fd, rel_tol=1e-6, abs_tol=1e-12)

    def test_gradient_direction(self):
        # the higher-labeled item scored lower must be pushed up (negative
        # cost gradient; trees fit the negated gradient)
        grads, _ = lambda_gradients([-1.0, 1.0], [2, 0], 10)
        assert grads[0] < 0 < grads[1]

    def test_pairs_entirely_beyond_k_carry_no_gradient(self):
        # item 1 (position 2) only pairs with items at positions 3 and 4;
        # at k=1 all those discounts are zero, so its gradient is exactly 0
        scores = [5.0, 4.0, 1.0, 0.5]
        labels = [1, 1, 2, 2]
        grads, _ = lambda_gradients(scores, labels, 1, sigma=1.0)
        assert grads[1] == 0.0
        assert grads[0] != 0.0

    def test_single_item_group(self):
        grads, hess = lambda_gradients([1.0], [3], 10)
        assert grads == [0.0] and hess == [0.0]
