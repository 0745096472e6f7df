#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "latgram/latgram.h"

namespace {

const lg_params kParams{2, 5.0, 1.0};
const int kOrigin[2] = {0, 0};

struct Lattice {
  lg_lattice* h = nullptr;
  Lattice(std::vector<int> extents, std::vector<int> drivers, std::vector<int> targets,
          lg_params params = kParams) {
    REQUIRE(lg_lattice_create(&params, extents.data(), drivers.data(), drivers.size() / 2,
                              targets.data(), targets.size() / 2, &h) == LG_OK);
  }
  ~Lattice() { lg_lattice_destroy(h); }
};

}  // namespace

TEST_CASE("version and status strings") {
  CHECK(std::strlen(lg_version()) > 0);
  CHECK(std::string(lg_status_string(LG_OK)) == "ok");
  CHECK(std::strlen(lg_status_string(LG_ERR_SINGULAR_GRAMIAN)) > 0);
  CHECK(std::strlen(lg_status_string(static_cast<lg_status>(99))) > 0);
}

TEST_CASE("Bessel functions") {
  double v = 0;
  REQUIRE(lg_bessel_i(0, 1.0, &v) == LG_OK);
  CHECK(v == doctest::Approx(1.2660658777520084).epsilon(1e-14));
  REQUIRE(lg_bessel_i_scaled(-3, 2.0, &v) == LG_OK);
  double w = 0;
  REQUIRE(lg_bessel_i_scaled(3, 2.0, &w) == LG_OK);
  CHECK(v == w);
  double seq[6];
  REQUIRE(lg_bessel_i_scaled_sequence(5, 2.0, seq) == LG_OK);
  CHECK(seq[3] == doctest::Approx(w).epsilon(1e-14));

  CHECK(lg_bessel_i(0, -1.0, &v) == LG_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(lg_last_error()) > 0);
  CHECK(lg_bessel_i(0, 1000.0, &v) == LG_ERR_RANGE);
  CHECK(lg_bessel_i(0, 1.0, nullptr) == LG_ERR_INVALID_ARGUMENT);
}

TEST_CASE("infinite-lattice entries") {
  double v = 0;
  REQUIRE(lg_integrand(&kParams, kOrigin, kOrigin, kOrigin, 1, 0.0, &v) == LG_OK);
  CHECK(v == 1.0);

  double center = 0;
  REQUIRE(lg_infinite_entry(&kParams, kOrigin, kOrigin, kOrigin, 1, 5.0, nullptr, &center) ==
          LG_OK);
  CHECK(center == doctest::Approx(0.11053177350861884).epsilon(1e-9));

  const int pi[6] = {0, 0, 1, 0, 1, 1};
  const int pj[6] = {0, 0, 0, 0, -1, 1};
  double batch[3];
  REQUIRE(lg_infinite_entries(&kParams, pi, pj, 3, kOrigin, 1, 5.0, nullptr, 2, batch) ==
          LG_OK);
  CHECK(batch[0] == center);

  double limit = 0;
  REQUIRE(lg_infinite_entry_limit(&kParams, kOrigin, kOrigin, kOrigin, 1, nullptr, &limit) ==
          LG_OK);
  CHECK(limit >= center);
  const lg_params marginal{2, 4.0, 1.0};
  CHECK(lg_infinite_entry_limit(&marginal, kOrigin, kOrigin, kOrigin, 1, nullptr, &limit) ==
        LG_ERR_INVALID_ARGUMENT);

  const lg_params bad{0, 5.0, 1.0};
  CHECK(lg_infinite_entry(&bad, kOrigin, kOrigin, kOrigin, 1, 5.0, nullptr, &v) ==
        LG_ERR_INVALID_ARGUMENT);
  CHECK(lg_infinite_entry(&kParams, kOrigin, kOrigin, kOrigin, 1, -1.0, nullptr, &v) ==
        LG_ERR_INVALID_ARGUMENT);
  const lg_tolerances negative{-1.0, 1e-10};
  CHECK(lg_infinite_entry(&kParams, kOrigin, kOrigin, kOrigin, 1, 5.0, &negative, &v) ==
        LG_ERR_INVALID_ARGUMENT);
}

TEST_CASE("output Gramian and energies") {
  const int targets[6] = {0, 0, 1, 0, 1, 1};
  double W[9];
  std::size_t quads = 0;
  REQUIRE(lg_output_gramian_infinite(&kParams, targets, 3, kOrigin, 1, 5.0, nullptr, 0, W,
                                     &quads) == LG_OK);
  CHECK(quads == 6);
  CHECK(W[1] == W[3]);
  CHECK(W[2] == W[6]);

  const double b[3] = {1, 1, 1};
  double e = 0, mu[3], contrib[3];
  REQUIRE(lg_min_energy(b, W, 3, &e) == LG_OK);
  double e2 = 0;
  REQUIRE(lg_energy_report(b, W, 3, &e2, mu, contrib) == LG_OK);
  CHECK(e2 == doctest::Approx(e).epsilon(1e-10));
  CHECK(mu[0] <= mu[1]);
  CHECK(contrib[0] + contrib[1] + contrib[2] == doctest::Approx(e2).epsilon(1e-12));

  const double singular[4] = {1, 1, 1, 1};
  CHECK(lg_min_energy(b, singular, 2, &e) == LG_ERR_SINGULAR_GRAMIAN);
  double ev[2];
  REQUIRE(lg_symmetric_eigenvalues(singular, 2, ev) == LG_OK);
  CHECK(std::abs(ev[0]) < 1e-15);
  CHECK(ev[1] == doctest::Approx(2.0));
  const double skew[4] = {1, 2, 0, 1};
  CHECK(lg_symmetric_eigenvalues(skew, 2, ev) == LG_ERR_INVALID_ARGUMENT);

  double energy = 0;
  REQUIRE(lg_single_target_energy(&kParams, targets + 2, 5.0, nullptr, &energy) == LG_OK);
  CHECK(energy > 0);
  const int far[2] = {400, 0};
  CHECK(lg_single_target_energy(&kParams, far, 1.0, nullptr, &energy) == LG_ERR_RANGE);
  double log_energy = 0;
  CHECK(lg_last_error_value(&log_energy) == 1);
  CHECK(log_energy > 700);
}

TEST_CASE("lattice handles") {
  Lattice lat({21, 21}, {0, 0}, {0, 0, 1, 0, 1, 1});
  CHECK(lg_lattice_dim(lat.h) == 2);
  CHECK(lg_lattice_num_nodes(lat.h) == 441);
  CHECK(lg_lattice_num_drivers(lat.h) == 1);
  CHECK(lg_lattice_num_targets(lat.h) == 3);
  lg_params p{};
  REQUIRE(lg_lattice_params(lat.h, &p) == LG_OK);
  CHECK(p.p == 5.0);
  std::size_t idx = 0;
  REQUIRE(lg_lattice_flat_index(lat.h, kOrigin, &idx) == LG_OK);
  CHECK(idx == 220);
  const int out_of_range[2] = {11, 0};
  CHECK(lg_lattice_flat_index(lat.h, out_of_range, &idx) == LG_ERR_RANGE);
  int ok = -1;
  REQUIRE(lg_lattice_output_controllable(lat.h, &ok) == LG_OK);
  CHECK(ok == 1);

  std::vector<double> A(441 * 441);
  REQUIRE(lg_lattice_system_matrix(lat.h, A.data()) == LG_OK);
  CHECK(A[220 * 441 + 220] == -5.0);
  CHECK(A[220 * 441 + 221] == 1.0);

  lg_lattice* h = nullptr;
  const int even[2] = {20, 21};
  CHECK(lg_lattice_create(&kParams, even, kOrigin, 1, nullptr, 0, &h) ==
        LG_ERR_INVALID_ARGUMENT);
  CHECK(h == nullptr);
  const int ext[2] = {3, 3};
  const int outside[2] = {2, 0};
  CHECK(lg_lattice_create(&kParams, ext, outside, 1, nullptr, 0, &h) == LG_ERR_RANGE);
  CHECK(lg_lattice_create(nullptr, ext, kOrigin, 1, nullptr, 0, &h) ==
        LG_ERR_INVALID_ARGUMENT);

  Lattice mirrored({5, 5}, {0, 0}, {1, 0, -1, 0});
  REQUIRE(lg_lattice_output_controllable(mirrored.h, &ok) == LG_OK);
  CHECK(ok == 0);

  lg_lattice_destroy(nullptr);
  CHECK(lg_lattice_num_nodes(nullptr) == 0);
}

TEST_CASE("finite Gramians through handles") {
  Lattice lat({5, 5}, {0, 0}, {0, 0, 1, 0});
  lg_finite_gramian* spectral = nullptr;
  lg_finite_gramian* ode = nullptr;
  REQUIRE(lg_finite_gramian_compute(lat.h, 2.0, LG_GRAMIAN_SPECTRAL, 0, &spectral) == LG_OK);
  REQUIRE(lg_finite_gramian_compute(lat.h, 2.0, LG_GRAMIAN_ODE, 0, &ode) == LG_OK);
  CHECK(lg_finite_gramian_size(spectral) == 25);
  CHECK(lg_finite_gramian_horizon(spectral) == 2.0);
  CHECK(lg_finite_gramian_unique_entries(ode) == 325);
  CHECK(lg_finite_gramian_rhs_evaluations(ode) > 0);

  std::vector<double> m1(625), m2(625);
  REQUIRE(lg_finite_gramian_matrix(spectral, m1.data()) == LG_OK);
  REQUIRE(lg_finite_gramian_matrix(ode, m2.data()) == LG_OK);
  double worst = 0;
  for (std::size_t k = 0; k < m1.size(); ++k) worst = std::max(worst, std::abs(m1[k] - m2[k]));
  CHECK(worst < 1e-8);

  double e = 0;
  REQUIRE(lg_finite_gramian_entry(spectral, kOrigin, kOrigin, &e) == LG_OK);
  CHECK(e == m1[12 * 25 + 12]);
  double out[4];
  REQUIRE(lg_finite_gramian_output(spectral, out) == LG_OK);
  CHECK(out[0] == doctest::Approx(e).epsilon(1e-14));
  double direct[4];
  REQUIRE(lg_finite_output_gramian(lat.h, 2.0, direct) == LG_OK);
  for (int k = 0; k < 4; ++k) CHECK(direct[k] == doctest::Approx(out[k]).epsilon(1e-12));

  const int pi[4] = {0, 0, 1, 0};
  const int pj[4] = {0, 0, 0, 0};
  double fin[2], ref[2], ae[2], re[2], max_abs = -1, max_rel = -1;
  REQUIRE(lg_compare(spectral, spectral, pi, pj, 2, nullptr, 1, fin, ref, ae, re, &max_abs,
                     &max_rel) == LG_OK);
  CHECK(max_abs == 0.0);
  CHECK(max_rel == 0.0);
  REQUIRE(lg_compare(spectral, nullptr, pi, pj, 2, nullptr, 2, fin, ref, ae, re, &max_abs,
                     &max_rel) == LG_OK);
  CHECK(max_abs > 0.0);
  CHECK(ae[0] == doctest::Approx(std::abs(fin[0] - ref[0])));
  CHECK(re[0] == doctest::Approx(ae[0] / std::abs(fin[0])));
  REQUIRE(lg_compare(spectral, nullptr, pi, pj, 2, nullptr, 1, nullptr, nullptr, nullptr,
                     nullptr, nullptr, nullptr) == LG_OK);
  const int bad[2] = {3, 0};
  CHECK(lg_compare(spectral, nullptr, bad, pj, 1, nullptr, 1, fin, ref, ae, re, nullptr,
                   nullptr) == LG_ERR_RANGE);

  lg_finite_gramian_destroy(spectral);
  lg_finite_gramian_destroy(ode);

  Lattice driverless({3, 3}, {}, {});
  lg_finite_gramian* g = nullptr;
  CHECK(lg_finite_gramian_compute(driverless.h, 1.0, LG_GRAMIAN_SPECTRAL, 0, &g) ==
        LG_ERR_INVALID_ARGUMENT);
  CHECK(g == nullptr);
}

TEST_CASE("controller handles") {
  Lattice lat({21, 21}, {0, 0}, {0, 0, 1, 0, 1, 1});
  double W[9];
  REQUIRE(lg_finite_output_gramian(lat.h, 5.0, W) == LG_OK);
  const double y_f[3] = {1, 1, 1};
  lg_controller* ctrl = nullptr;
  REQUIRE(lg_controller_create(lat.h, nullptr, y_f, 5.0, W, &ctrl) == LG_OK);
  double b[3];
  REQUIRE(lg_controller_control_action(ctrl, b) == LG_OK);
  CHECK(b[0] == 1.0);
  double predicted = 0;
  REQUIRE(lg_controller_predicted_energy(ctrl, &predicted) == LG_OK);
  double e = 0;
  REQUIRE(lg_min_energy(y_f, W, 3, &e) == LG_OK);
  CHECK(predicted == doctest::Approx(e).epsilon(1e-14));
  double u = 0;
  REQUIRE(lg_controller_eval(ctrl, 5.0, &u) == LG_OK);
  CHECK(lg_controller_eval(ctrl, 6.0, &u) == LG_ERR_INVALID_ARGUMENT);

  std::vector<double> inputs(4001);
  double realized = 0, y_final[3];
  REQUIRE(lg_controller_simulate(ctrl, 4000, nullptr, inputs.data(), &realized, y_final) ==
          LG_OK);
  for (double y : y_final) CHECK(std::abs(y - 1.0) < 1e-6);
  CHECK(std::abs(realized - predicted) / predicted < 1e-6);
  CHECK(inputs[4000] == u);
  CHECK(lg_controller_simulate(ctrl, 0, nullptr, nullptr, &realized, y_final) ==
        LG_ERR_INVALID_ARGUMENT);
  lg_controller_destroy(ctrl);

  const double singular[9] = {1, 1, 1, 1, 1, 1, 1, 1, 1};
  CHECK(lg_controller_create(lat.h, nullptr, y_f, 5.0, singular, &ctrl) ==
        LG_ERR_SINGULAR_GRAMIAN);
  CHECK(ctrl == nullptr);
}
