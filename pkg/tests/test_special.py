"""Special-function kernels against independent quadrature/series oracles."""

import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from reviewaudit.special import (
    TailProbabilityQuery,
    chi_square_upper_tail,
    f_upper_tail,
    log_gamma,
    normal_upper_tail,
    regularized_incomplete_beta,
    regularized_incomplete_gamma_lower,
    regularized_incomplete_gamma_upper,
    student_t_upper_tail,
    tail_probability,
)

from _oracles import (
    chi_square_upper_oracle,
    f_upper_oracle,
    gamma_lower_oracle,
    normal_upper_oracle,
    student_t_upper_oracle,
)


class TestLogGamma:
    def test_golden_values(self):
        assert log_gamma(1.0) == pytest.approx(0.0, abs=1e-14)
        assert log_gamma(6.0) == pytest.approx(math.log(120.0), abs=1e-12)
        assert log_gamma(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), abs=1e-12)

    @pytest.mark.parametrize("bad", [0.0, -1.0, -0.5, math.inf])
    def test_domain(self, bad):
        with pytest.raises(ValueError):
            log_gamma(bad)

    def test_recurrence_small_range(self):
        # |log_gamma| stays below ~1.1e4 here, so the 1e-11 absolute bound
        # is comfortably above the float64 representation granularity
        rng = random.Random(2024)
        for _ in range(400):
            x = math.exp(rng.uniform(math.log(0.5), math.log(1500.0)))
            resid = abs(log_gamma(x + 1.0) - log_gamma(x) - math.log(x))
            assert resid <= 1e-11, f"x={x}: residual {resid}"

    def test_recurrence_full_range(self):
        # near x = 1e4 the value is ~8e4, where a float64 ulp is ~1.5e-11:
        # two representation roundings alone can exceed a bare 1e-11, so
        # the bound is widened by the ulps of the stored values
        rng = random.Random(2025)
        for _ in range(400):
            x = rng.uniform(0.5, 1e4)
            a, b = log_gamma(x + 1.0), log_gamma(x)
            resid = abs(a - b - math.log(x))
            tol = 1e-11 + 2.0 * (math.ulp(abs(a)) + math.ulp(abs(b)))
            assert resid <= tol, f"x={x}: residual {resid} tol {tol}"

    def test_factorials(self):
        for n in range(2, 30):
            assert log_gamma(float(n)) == pytest.approx(
                math.lgamma(n), rel=1e-14, abs=1e-13
            )


class TestIncompleteGamma:
    def test_zero(self):
        assert regularized_incomplete_gamma_lower(3.5, 0.0) == 0.0
        assert regularized_incomplete_gamma_upper(3.5, 0.0) == 1.0

    def test_exponential_case(self):
        # P(1, x) = 1 - exp(-x)
        assert regularized_incomplete_gamma_lower(1.0, math.log(2.0)) == pytest.approx(
            0.5, abs=1e-12
        )

    def test_half_shape_quadrature_point(self):
        # frozen from the adaptive-quadrature oracle
        assert gamma_lower_oracle(0.5, 1.92073) == pytest.approx(0.95, abs=1e-6)
        assert regularized_incomplete_gamma_lower(0.5, 1.92073) == pytest.approx(
            gamma_lower_oracle(0.5, 1.92073), abs=1e-10
        )

    def test_against_quadrature_grid(self):
        rng = random.Random(7)
        for _ in range(60):
            s = math.exp(rng.uniform(math.log(0.5), math.log(50.0)))
            x = rng.uniform(0.0, 3.0 * s + 5.0)
            assert regularized_incomplete_gamma_lower(s, x) == pytest.approx(
                gamma_lower_oracle(s, x), abs=1e-10
            )

    def test_complement_sweep(self):
        rng = random.Random(11)
        for _ in range(500):
            s = math.exp(rng.uniform(math.log(0.5), math.log(300.0)))
            x = math.exp(rng.uniform(math.log(1e-3), math.log(600.0)))
            p = regularized_incomplete_gamma_lower(s, x)
            q = regularized_incomplete_gamma_upper(s, x)
            assert 0.0 <= p <= 1.0
            assert abs(p + q - 1.0) <= 1e-10

    @pytest.mark.parametrize("s,x", [(0.0, 1.0), (-1.0, 1.0), (1.0, -0.5)])
    def test_domain(self, s, x):
        with pytest.raises(ValueError):
            regularized_incomplete_gamma_lower(s, x)


def _beta_exact_integer(x: float, a: int, b: int) -> float:
    # I_x(a, b) = sum_{j=a}^{a+b-1} C(a+b-1, j) x^j (1-x)^(a+b-1-j)
    n = a + b - 1
    return math.fsum(
        math.comb(n, j) * x ** j * (1.0 - x) ** (n - j) for j in range(a, n + 1)
    )


class TestIncompleteBeta:
    def test_uniform_case(self):
        assert regularized_incomplete_beta(0.3, 1.0, 1.0) == pytest.approx(0.3, abs=1e-12)

    def test_symmetry_midpoint(self):
        assert regularized_incomplete_beta(0.5, 2.0, 2.0) == pytest.approx(0.5, abs=1e-12)

    def test_closed_form_polynomial(self):
        # I_x(2,3) = 6x^2 - 8x^3 + 3x^4; at x = 1/4 this is 0.26171875
        x = 0.25
        expected = 6 * x**2 - 8 * x**3 + 3 * x**4
        assert expected == 0.26171875
        assert regularized_incomplete_beta(x, 2.0, 3.0) == pytest.approx(
            expected, abs=1e-10
        )

    def test_integer_shape_grid(self):
        rng = random.Random(13)
        for _ in range(200):
            a = rng.randint(1, 8)
            b = rng.randint(1, 8)
            x = rng.random()
            assert regularized_incomplete_beta(x, a, b) == pytest.approx(
                _beta_exact_integer(x, a, b), abs=1e-12
            )

    def test_symmetry_sweep(self):
        rng = random.Random(17)
        for _ in range(500):
            a = math.exp(rng.uniform(math.log(0.5), math.log(200.0)))
            b = math.exp(rng.uniform(math.log(0.5), math.log(200.0)))
            x = rng.random()
            lhs = regularized_incomplete_beta(x, a, b)
            rhs = regularized_incomplete_beta(1.0 - x, b, a)
            assert 0.0 <= lhs <= 1.0
            assert abs(lhs + rhs - 1.0) <= 1e-10

    @pytest.mark.parametrize("x,a,b", [(-0.1, 1, 1), (1.1, 1, 1), (0.5, 0, 1), (0.5, 1, -2)])
    def test_domain(self, x, a, b):
        with pytest.raises(ValueError):
            regularized_incomplete_beta(x, a, b)


class TestTails:
    def test_chi_square_conventional_critical_value(self):
        p = chi_square_upper_tail(3.841, 1)
        assert 0.0499 <= p <= 0.0501
        assert p == pytest.approx(chi_square_upper_oracle(3.841, 1), abs=1e-10)

    def test_chi_square_quadrature_grid(self):
        rng = random.Random(19)
        for _ in range(40):
            df = rng.randint(1, 40)
            stat = rng.uniform(0.01, 3.0 * df)
            assert chi_square_upper_tail(stat, df) == pytest.approx(
                chi_square_upper_oracle(stat, df), abs=1e-10
            )

    def test_student_t_cauchy_closed_form(self):
        # t with 1 degree of freedom is Cauchy: P(T >= 1) = 1/2 - atan(1)/pi
        assert student_t_upper_tail(1.0, 1) == pytest.approx(0.25, abs=1e-10)

    def test_student_t_quadrature_grid(self):
        rng = random.Random(23)
        for _ in range(40):
            df = rng.randint(1, 60)
            t = rng.uniform(-5.0, 5.0)
            assert student_t_upper_tail(t, df) == pytest.approx(
                student_t_upper_oracle(t, df), abs=1e-10
            )

    def test_f_equals_t_squared(self):
        rng = random.Random(29)
        for _ in range(300):
            t = rng.uniform(-10.0, 10.0)
            nu = rng.randint(1, 100)
            f_tail = f_upper_tail(t * t, 1, nu)
            t_tail = 2.0 * student_t_upper_tail(abs(t), nu)
            assert abs(f_tail - t_tail) <= 1e-9

    def test_f_quadrature_spot(self):
        assert f_upper_tail(1.5, 1, 4) == pytest.approx(
            f_upper_oracle(1.5, 1, 4), abs=1e-10
        )
        assert f_upper_tail(2.2, 3, 7) == pytest.approx(
            f_upper_oracle(2.2, 3, 7), abs=1e-10
        )

    def test_normal_tail_against_erf_series(self):
        for z in (-3.0, -1.0, -0.2, 0.0, 0.5, 1.0, 2.5, 4.0):
            assert normal_upper_tail(z) == pytest.approx(
                normal_upper_oracle(z), abs=1e-12
            )

    def test_normal_golden(self):
        assert normal_upper_tail(1.0) == pytest.approx(0.158655253931, abs=1e-10)

    @settings(max_examples=200, deadline=None, derandomize=True)
    @given(
        st.floats(min_value=-50.0, max_value=50.0),
        st.floats(min_value=0.0, max_value=50.0),
        st.integers(min_value=1, max_value=200),
    )
    def test_upper_tails_monotone_and_bounded(self, stat, bump, df):
        for fn in (
            lambda s: chi_square_upper_tail(s, df),
            lambda s: student_t_upper_tail(s, df),
            lambda s: f_upper_tail(s, df, df + 1),
        ):
            hi, lo = fn(stat), fn(stat + bump)
            assert 0.0 <= hi <= 1.0 and 0.0 <= lo <= 1.0
            assert lo <= hi + 1e-12


class TestTailProbabilityQuery:
    def test_dispatch(self):
        q = TailProbabilityQuery("chi_square", 3.841, "upper", df=1)
        assert tail_probability(q) == pytest.approx(0.05, abs=2e-5)
        q = TailProbabilityQuery("student_t", 1.0, "upper", df=1)
        assert tail_probability(q) == pytest.approx(0.25, abs=1e-10)
        q = TailProbabilityQuery("f", 1.5, "upper", df1=1, df2=4)
        assert tail_probability(q) == pytest.approx(0.287864134727, abs=1e-9)

    def test_two_sided_doubles_smaller_t_tail(self):
        upper = tail_probability(TailProbabilityQuery("student_t", 1.7, "upper", df=9))
        two = tail_probability(TailProbabilityQuery("student_t", -1.7, "two_sided", df=9))
        assert two == pytest.approx(2.0 * upper, abs=1e-12)

    def test_lower_is_complement(self):
        upper = tail_probability(TailProbabilityQuery("chi_square", 2.5, "upper", df=3))
        lower = tail_probability(TailProbabilityQuery("chi_square", 2.5, "lower", df=3))
        assert upper + lower == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("dist", ["chi_square", "f"])
    def test_two_sided_rejected_for_upper_tail_distributions(self, dist):
        kwargs = {"df": 2} if dist == "chi_square" else {"df1": 2, "df2": 3}
        query = TailProbabilityQuery(dist, 1.0, "two_sided", **kwargs)
        with pytest.raises(ValueError, match="two_sided"):
            tail_probability(query)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"distribution": "poisson", "statistic": 1.0, "df": 1},
            {"distribution": "chi_square", "statistic": 1.0},
            {"distribution": "chi_square", "statistic": 1.0, "df": 0},
            {"distribution": "chi_square", "statistic": 1.0, "df": 1.5},
            {"distribution": "f", "statistic": 1.0, "df1": 1},
            {"distribution": "chi_square", "statistic": math.nan, "df": 1},
            {"distribution": "chi_square", "statistic": 1.0, "df": 1, "tail": "sideways"},
        ],
    )
    def test_query_validation(self, kwargs):
        with pytest.raises(ValueError):
            TailProbabilityQuery(**kwargs)
