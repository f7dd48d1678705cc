# Input: iht 模块与 pytest
# Output: 硬阈值与 IHT 重构的断言
# Pos: iht 测试
# 一旦我被更新，务必更新我的开头注释，以及所属文件夹的MD。

"""
IHT 重构模块单元测试
"""

from pathlib import Path
from tempfile import TemporaryDirectory

import numpy as np
import pytest
from pydantic import ValidationError

from src.config.models import IhtConfig
from src.iht.solver import default_epsilon, hard_threshold, iht_reconstruct
from src.linmap.matrix import compress, generate_matrix
from src.models import IhtDivergedError, MeasurementMatrix
from src.numcore.rng import rng_stream
from src.runner.selftest import oracle_one_sparse
from src.utils.helpers import squared_norm
from src.utils.logger import setup_logger


@pytest.fixture(autouse=True)
def setup_logger_for_tests():
    """每个测试前设置 logger"""
    with TemporaryDirectory() as tmpdir:
        setup_logger(Path(tmpdir), console=False)
        yield


# 单位步长 IHT 在 N=256, M=128, L=10 下的精确支撑恢复率回归下限（实测 0.64）
DESK_RECOVERY_FLOOR = 0.60


def _nmse(estimate: np.ndarray, truth: np.ndarray) -> float:
    return squared_norm(estimate - truth) / squared_norm(truth)


class TestHardThreshold:
    """硬阈值测试"""

    def test_keeps_largest(self):
        sp = hard_threshold(np.array([5, -3, 1, 4j]), 2)
        np.testing.assert_array_equal(sp.dense, [5, 0, 0, 4j])

    def test_full_is_identity(self):
        x = rng_stream(1, "ht").complex_normal(6)
        np.testing.assert_array_equal(hard_threshold(x, 6).dense, x)

    def test_tie_break(self):
        np.testing.assert_array_equal(hard_threshold(np.array([2, 2, 2]), 1).dense, [2, 0, 0])

    def test_l_too_large(self):
        with pytest.raises(ValueError):
            hard_threshold(np.ones(2), 3)


class TestIhtConfig:
    """IHT 配置约束测试"""

    def test_defaults(self):
        cfg = IhtConfig(sparsity_l=3)
        assert cfg.epsilon is None and cfg.max_iters == 500

    @pytest.mark.parametrize("kwargs", [{"sparsity_l": 0}, {"sparsity_l": 1, "epsilon": 0.0}, {"sparsity_l": 1, "max_iters": 0}])
    def test_invalid(self, kwargs):
        with pytest.raises(ValidationError):
            IhtConfig(**kwargs)

    def test_default_epsilon(self):
        assert default_epsilon(np.zeros(3)) == pytest.approx(1e-8)
        assert default_epsilon(np.array([10.0, 0.0])) == pytest.approx(1e-6)


class TestIhtReconstruct:
    """IHT 重构测试"""

    def test_zero_measurement(self):
        """y = 0：一次迭代收敛到零估计"""
        A = generate_matrix(rng_stream(0, "matrix"), 4, 8)
        result = iht_reconstruct(A, np.zeros(4, dtype=complex), IhtConfig(sparsity_l=2))
        assert result.iterations == 1
        assert result.converged
        np.testing.assert_array_equal(result.estimate.dense, np.zeros(8))

    def test_identity_like_matrix_recovers_exactly(self):
        """M=N，A=I/1.01，2 稀疏无噪声：NMSE < 1e-10"""
        N = 16
        A = MeasurementMatrix(entries=np.eye(N) / 1.01, op_norm_bound=1 / 1.01)
        s = np.zeros(N, dtype=complex)
        s[[3, 11]] = [2 - 1j, -0.5 + 1.5j]
        result = iht_reconstruct(A, compress(A, s), IhtConfig(sparsity_l=2, epsilon=1e-30, max_iters=5000))
        assert result.estimate.support.to_list() == [3, 11]
        assert _nmse(result.estimate.dense, s) < 1e-10

    def test_one_sparse_matches_exhaustive_oracle(self):
        """N=8, M=4, L=1：100 个实例支撑集全部一致，系数误差 < 1e-8"""
        cfg = IhtConfig(sparsity_l=1, epsilon=1e-26, max_iters=5000)
        for i in range(100):
            rng = rng_stream(i, "iht-oracle")
            A = generate_matrix(rng.child("matrix"), 4, 8)
            x = np.zeros(8, dtype=complex)
            x[int(rng.subset(8, 1)[0])] = complex(*rng.normal(2))
            y = compress(A, x)
            result = iht_reconstruct(A, y, cfg)
            j, coef = oracle_one_sparse(A.entries, y)
            assert result.estimate.support.to_list() == [j]
            assert abs(result.estimate.dense[j] - coef) < 1e-8

    def test_monotone_residual_strict(self):
        """‖A‖_op < 1 时残差单调不增（strict 模式逐次检查）"""
        rng = rng_stream(3, "mono")
        A = generate_matrix(rng.child("matrix"), 40, 100)
        y = rng.complex_normal(40)
        result = iht_reconstruct(A, y, IhtConfig(sparsity_l=5, max_iters=300), strict=True)
        assert result.estimate.nnz <= 5

    def test_fixed_point_property(self):
        """收敛结果再迭代一次，变化不超过 √ε"""
        rng = rng_stream(4, "fixed")
        A = generate_matrix(rng.child("matrix"), 32, 64)
        x = np.zeros(64, dtype=complex)
        x[rng.subset(64, 3)] = rng.complex_normal(3)
        y = compress(A, x)
        eps = 1e-16
        cfg = IhtConfig(sparsity_l=3, epsilon=eps, max_iters=5000)
        result = iht_reconstruct(A, y, cfg)
        assert result.converged
        step = hard_threshold(
            result.estimate.dense + A.entries.T @ (y - compress(A, result.estimate.dense)), 3
        ).dense
        assert np.linalg.norm(step - result.estimate.dense) <= np.sqrt(eps)

    def test_unconverged_flagged(self):
        rng = rng_stream(5, "cap")
        A = generate_matrix(rng.child("matrix"), 32, 64)
        y = rng.complex_normal(32)
        result = iht_reconstruct(A, y, IhtConfig(sparsity_l=4, epsilon=1e-300, max_iters=3))
        assert not result.converged
        assert result.iterations == 3

    def test_dimension_mismatch(self):
        A = generate_matrix(rng_stream(0, "matrix"), 4, 8)
        with pytest.raises(ValueError):
            iht_reconstruct(A, np.zeros(5, dtype=complex), IhtConfig(sparsity_l=1))
        with pytest.raises(ValueError):
            iht_reconstruct(A, np.zeros(4, dtype=complex), IhtConfig(sparsity_l=9))

    def test_non_finite_measurement_diverges(self):
        A = generate_matrix(rng_stream(0, "matrix"), 4, 8)
        y = np.array([np.inf, 0, 0, 0], dtype=complex)
        with pytest.raises(IhtDivergedError):
            iht_reconstruct(A, y, IhtConfig(sparsity_l=1, epsilon=1.0))

    def test_desk_scale_recovery(self):
        """
        N=256, M=128, L=10，±1 稀疏信号，单位步长 IHT

        固定种子下实测 64/100 精确恢复（3000 与 30000 次迭代结果相同，全部收敛），
        其余实例停在错误不动点；以 0.60 作为回归下限，恢复实例 NMSE < 1e-10
        """
        N, M, L = 256, 128, 10
        cfg = IhtConfig(sparsity_l=L, epsilon=1e-28, max_iters=3000)
        recovered = 0
        for trial in range(100):
            rng = rng_stream(trial, "desk")
            A = generate_matrix(rng.child("matrix"), M, N)
            support = rng.subset(N, L)
            x = np.zeros(N, dtype=complex)
            x[support] = np.where(rng.uniform(L) < 0.5, -1.0, 1.0)
            result = iht_reconstruct(A, compress(A, x), cfg)
            if result.estimate.support.to_list() == support.tolist():
                recovered += 1
                assert _nmse(result.estimate.dense, x) < 1e-10
        assert recovered / 100 >= DESK_RECOVERY_FLOOR
