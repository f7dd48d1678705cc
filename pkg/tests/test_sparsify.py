# Input: sparsify 模块与 pytest/hypothesis
# Output: 掩码、降维与回填的断言
# Pos: sparsify 测试
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
稀疏化模块单元测试
"""

import itertools
from pathlib import Path
from tempfile import TemporaryDirectory

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.models import ReducedVector, SparseApprox, Support
from src.numcore.rng import rng_stream
from src.sparsify.masks import apply_mask, expand, reduce, top_l_support, uniform_support
from src.utils.logger import setup_logger


@pytest.fixture(autouse=True)
def setup_logger_for_tests():
    """每个测试前设置 logger"""
    with TemporaryDirectory() as tmpdir:
        setup_logger(Path(tmpdir), console=False)
        yield


def _complex_vector(seed: int, n: int) -> np.ndarray:
    return rng_stream(seed, "vec").complex_normal(n, 1.0)


class TestSupport:
    """支撑集类型测试"""

    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            Support(np.array([2, 1]), 4)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            Support(np.array([0, 4]), 4)

    def test_from_indices_sorts(self):
        s = Support.from_indices([3, 0, 2], 5)
        assert s.to_list() == [0, 2, 3]
        assert s.to_text() == "0 2 3"

    def test_from_indices_rejects_duplicates(self):
        with pytest.raises(ValueError):
            Support.from_indices([1, 1], 3)

    def test_membership_and_equality(self):
        s = Support.from_indices([1, 3], 4)
        assert 1 in s and 3 in s and 2 not in s
        assert s == Support(np.array([1, 3]), 4)
        assert s != Support(np.array([1, 3]), 5)

    def test_indices_read_only(self):
        s = Support.full(3)
        with pytest.raises(ValueError):
            s.indices[0] = 2


class TestTopL:
    """top-L 支撑集测试"""

    def test_largest_moduli(self):
        s = np.array([3, -1 + 0j, 0.5, 2j])
        assert top_l_support(s, 2).to_list() == [0, 3]

    def test_tie_break_lowest_index(self):
        s = np.array([1, 1j, -1, -1j])
        assert top_l_support(s, 2).to_list() == [0, 1]

    def test_full_support(self):
        s = _complex_vector(1, 9)
        assert top_l_support(s, 9) == Support.full(9)

    def test_l_greater_than_n(self):
        with pytest.raises(ValueError):
            top_l_support(np.ones(3), 4)

    def test_best_l_term_approximation(self):
        """N ≤ 10 时 top-L 在所有 L 元支撑集中误差最小（200 个随机向量穷举）"""
        for trial in range(200):
            rng = rng_stream(trial, "topl")
            n = 4 + trial % 7
            L = 1 + trial % (n - 1)
            s = rng.complex_normal(n, 1.0)
            best = np.linalg.norm(apply_mask(s, top_l_support(s, L)).dense - s)
            for combo in itertools.combinations(range(n), L):
                other = np.linalg.norm(apply_mask(s, Support(np.array(combo), n)).dense - s)
                assert best <= other + 1e-12


class TestUniformSupport:
    """均匀随机掩码测试"""

    def test_exhaustive(self):
        assert uniform_support(rng_stream(0, "mask"), 4, 4).to_list() == [0, 1, 2, 3]

    def test_deterministic(self):
        a = uniform_support(rng_stream(9, "mask/3"), 100, 10)
        b = uniform_support(rng_stream(9, "mask/3"), 100, 10)
        assert a == b

    def test_l_greater_than_n(self):
        with pytest.raises(ValueError):
            uniform_support(rng_stream(0, "mask"), 3, 4)

    def test_uniform_frequency(self):
        """N=10, L=1：10⁵ 次抽样中每个下标频率在 0.1 ± 3σ 内"""
        rng = rng_stream(2024, "uniformity")
        draws = 100_000
        counts = np.zeros(10)
        for _ in range(draws):
            counts[uniform_support(rng, 10, 1).indices[0]] += 1
        sigma = np.sqrt(0.1 * 0.9 / draws)
        assert np.all(np.abs(counts / draws - 0.1) <= 3 * sigma)

    def test_expected_mask_scales_by_l_over_n(self):
        """均匀掩码的逐元素期望为 (L/N)·s（3σ 容差）"""
        n, L, masks = 8, 2, 10_000
        s = _complex_vector(3, n)
        rng = rng_stream(5, "mask-mean")
        acc = np.zeros(n, dtype=complex)
        for _ in range(masks):
            acc += apply_mask(s, uniform_support(rng, n, L)).dense
        mean = acc / masks
        p = L / n
        sigma = np.abs(s) * np.sqrt(p * (1 - p) / masks)
        assert np.all(np.abs(mean - p * s) <= 3 * sigma + 1e-12)


class TestApplyMask:
    """掩码应用测试"""

    def test_basic(self):
        sp = apply_mask(np.array([1, 2, 3, 4]), Support(np.array([1, 3]), 4))
        np.testing.assert_array_equal(sp.dense, [0, 2, 0, 4])
        assert sp.nnz == 2

    def test_full_is_identity(self):
        s = _complex_vector(4, 6)
        np.testing.assert_array_equal(apply_mask(s, Support.full(6)).dense, s)

    def test_empty_support(self):
        sp = apply_mask(np.ones(5), Support(np.array([], dtype=np.int64), 5))
        np.testing.assert_array_equal(sp.dense, np.zeros(5))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            apply_mask(np.ones(5), Support.full(4))


class TestReduceExpand:
    """降维与回填测试"""

    def test_reduce(self):
        sp = SparseApprox(np.array([0, 2, 0, 4], dtype=complex), Support(np.array([1, 3]), 4))
        np.testing.assert_array_equal(reduce(sp).values, [2, 4])

    def test_reduce_all_zero(self):
        sp = SparseApprox(np.zeros(4, dtype=complex), Support(np.array([0, 1]), 4))
        np.testing.assert_array_equal(reduce(sp).values, [0, 0])

    def test_expand(self):
        r = ReducedVector(np.array([2, 4], dtype=complex), Support(np.array([1, 3]), 4))
        np.testing.assert_array_equal(expand(r, 4), [0, 2, 0, 4])

    def test_expand_single(self):
        r = ReducedVector(np.array([5], dtype=complex), Support(np.array([0]), 1))
        np.testing.assert_array_equal(expand(r, 1), [5])

    def test_expand_out_of_range(self):
        r = ReducedVector(np.array([1], dtype=complex), Support(np.array([4]), 5))
        with pytest.raises(ValueError):
            expand(r, 4)

    @given(st.integers(min_value=0, max_value=10_000), st.integers(min_value=1, max_value=30))
    @settings(max_examples=100, deadline=None)
    def test_roundtrips(self, seed, n):
        rng = rng_stream(seed, "rt")
        L = int(rng.subset(n, 1)[0]) + 1
        support = uniform_support(rng, n, L)
        sp = apply_mask(rng.complex_normal(n), support)
        np.testing.assert_array_equal(expand(reduce(sp), n), sp.dense)
        r = ReducedVector(rng.complex_normal(L), support)
        np.testing.assert_array_equal(reduce(apply_mask(expand(r, n), support)).values, r.values)
