// Timings of the SRSW right-hand side (reference vs. kernel, serial vs.
// OpenMP) and of an ensemble forecast (particle-serial vs. particle-parallel).
//
//   bench_kernels [--nx 64] [--ny 32] [--reps 200] [--particles 50]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

#include "pfsw/harness.hpp"
#include "pfsw/parallel.hpp"
#include "pfsw/srsw.hpp"

namespace {

template <class F>
double time_ms(int reps, F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) f();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t nx = 64, ny = 32, particles = 50;
  int reps = 200;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string k = argv[i];
    const long v = std::strtol(argv[i + 1], nullptr, 10);
    if (k == "--nx") nx = static_cast<std::size_t>(v);
    else if (k == "--ny") ny = static_cast<std::size_t>(v);
    else if (k == "--reps") reps = static_cast<int>(v);
    else if (k == "--particles") particles = static_cast<std::size_t>(v);
    else {
      std::fprintf(stderr, "unknown option %s\n", argv[i]);
      return 2;
    }
  }

  auto cfg = pfsw::preset("srsw-standard");
  cfg.srsw.physical.nx = nx;
  cfg.srsw.physical.ny = ny;
  cfg.filter = pfsw::FilterConfig::defaults_for(particles);
  const auto setup = pfsw::make_setup(cfg);
  const auto& model = dynamic_cast<const pfsw::SrswModel&>(*setup.model);
  const auto& prm = model.params();
  const auto s = pfsw::unpack(setup.initial_truth, prm.grid);
  pfsw::RngStream rng(1, {0, 0, pfsw::Purpose::test, 0});
  const auto xi = model.noise_velocity(model.sample_noise(rng));

  std::printf("grid %zux%zu, %d threads\n", nx, ny, pfsw::thread_count());

  pfsw::Tendencies ser, par;
  pfsw::Tendencies ref;
  const double t_ref = time_ms(reps, [&] { ref = pfsw::tendencies_reference(s, prm, &xi); });
  const double t_ser = time_ms(reps, [&] { pfsw::tendencies(s, prm, &xi, ser, pfsw::Execution::serial); });
  const double t_par = time_ms(reps, [&] { pfsw::tendencies(s, prm, &xi, par, pfsw::Execution::parallel); });
  std::printf("tendencies  reference %8.3f ms  kernel serial %8.3f ms  kernel omp %8.3f ms\n", t_ref,
              t_ser, t_par);
  std::printf("            max |kernel - reference| = %.3g, serial == omp: %s\n",
              std::max({max_abs_diff(ser.dv1, ref.dv1), max_abs_diff(ser.dv2, ref.dv2),
                        max_abs_diff(ser.dh, ref.dh)}),
              (ser.dv1 == par.dv1 && ser.dv2 == par.dv2 && ser.dh == par.dh) ? "yes" : "no");

  const int sreps = std::max(1, reps / 20);
  const double t_step_ser =
      time_ms(sreps, [&] { pfsw::rk4_step(s, prm, &xi, pfsw::Execution::serial); });
  const double t_step_par =
      time_ms(sreps, [&] { pfsw::rk4_step(s, prm, &xi, pfsw::Execution::parallel); });
  std::printf("rk4 step    serial %8.3f ms  omp %8.3f ms\n", t_step_ser, t_step_par);

  const auto ens = pfsw::init_ensemble(cfg, setup);
  auto forecast = [&](pfsw::Execution ex) {
    std::vector<pfsw::StateVector> out(ens.size());
    pfsw::parallel_for(
        ens.size(),
        [&](std::size_t l) {
          pfsw::RngStream r(3, {l, 1, pfsw::Purpose::forecast, 0});
          out[l] = model.step(ens.particles[l], model.sample_noise(r));
        },
        ex);
    return out;
  };
  std::vector<pfsw::StateVector> fs, fp;
  const double t_fs = time_ms(1, [&] { fs = forecast(pfsw::Execution::serial); });
  const double t_fp = time_ms(1, [&] { fp = forecast(pfsw::Execution::parallel); });
  std::printf("forecast    %zu particles: serial %8.2f ms  omp %8.2f ms  identical: %s\n",
              ens.size(), t_fs, t_fp, fs == fp ? "yes" : "no");
  return 0;
}
