#include <doctest.h>

#include <cmath>

#include "vgce/adam.hpp"

using namespace vgce;

namespace {

AdamState make_state(const Tensor2D& p, double lr) {
    AdamState state;
    state.lr = lr;
    const Tensor2D* view = &p;
    state.reset({&view, 1});
    return state;
}

} // namespace

TEST_CASE("zero gradient leaves parameters unchanged") {
    Tensor2D p = Tensor2D::from_rows(2, 2, {1.0, -2.0, 3.0, 0.5});
    Tensor2D g(2, 2);
    AdamState state = make_state(p, 0.1);
    Tensor2D before = p;
    Tensor2D* pp = &p;
    const Tensor2D* gp = &g;
    adam_step({&pp, 1}, {&gp, 1}, state);
    for (size_t i = 0; i < p.size(); ++i) CHECK(p.data[i] == doctest::Approx(before.data[i]));
    CHECK(state.step_count == 1);
}

TEST_CASE("single step matches the hand-evaluated update") {
    // p=1, g=1, lr=0.1, defaults: m_hat = v_hat = 1, so p' = 1 - 0.1/(1+eps)
    Tensor2D p = Tensor2D::scalar(1.0);
    Tensor2D g = Tensor2D::scalar(1.0);
    AdamState state = make_state(p, 0.1);
    Tensor2D* pp = &p;
    const Tensor2D* gp = &g;
    adam_step({&pp, 1}, {&gp, 1}, state);
    CHECK(p.scalar_value() == doctest::Approx(0.9).epsilon(1e-6));
}

TEST_CASE("constant gradient decreases the parameter monotonically") {
    Tensor2D p = Tensor2D::scalar(1.0);
    Tensor2D g = Tensor2D::scalar(0.5);
    AdamState state = make_state(p, 0.05);
    Tensor2D* pp = &p;
    const Tensor2D* gp = &g;
    double prev = p.scalar_value();
    for (int step = 0; step < 2; ++step) {
        adam_step({&pp, 1}, {&gp, 1}, state);
        CHECK(p.scalar_value() < prev);
        prev = p.scalar_value();
    }
}

TEST_CASE("with beta1=beta2=0 the update direction is sign(grad)*lr") {
    for (double gval : {2.5, -0.3, 0.001, -7.0}) {
        Tensor2D p = Tensor2D::scalar(0.0);
        Tensor2D g = Tensor2D::scalar(gval);
        AdamState state = make_state(p, 0.01);
        state.beta1 = 0.0;
        state.beta2 = 0.0;
        state.epsilon = 1e-16;
        Tensor2D* pp = &p;
        const Tensor2D* gp = &g;
        adam_step({&pp, 1}, {&gp, 1}, state);
        CHECK(p.scalar_value() ==
              doctest::Approx(-0.01 * (gval > 0 ? 1.0 : -1.0)).epsilon(1e-9));
    }
}

TEST_CASE("shape mismatch is rejected") {
    Tensor2D p = Tensor2D::scalar(1.0);
    Tensor2D g(2, 2);
    AdamState state = make_state(p, 0.1);
    Tensor2D* pp = &p;
    const Tensor2D* gp = &g;
    CHECK_THROWS_AS(adam_step({&pp, 1}, {&gp, 1}, state), error);
}
