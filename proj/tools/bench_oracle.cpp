#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include <omp.h>

#include "psmon/oracle.hpp"
#include "psmon/simulator.hpp"

using namespace psmon;

// Times the serial and OpenMP oracle searches on the same small random traces
// and checks that they agree.
int main(int argc, char** argv) {
  CLI::App app{"serial vs parallel valid-snapshot search"};
  int traces = 200;
  int n = 4;
  Tick duration = 30;
  std::string form = "exactly";
  int k = 2;
  app.add_option("--traces", traces, "number of random traces")->capture_default_str();
  app.add_option("-n,--processes", n, "processes per trace")->capture_default_str()->check(CLI::Range(1, 4));
  app.add_option("--duration", duration, "ticks per trace")->capture_default_str()->check(CLI::Range(1, 30));
  app.add_option("--predicate", form, "conj | exactly | atleast")
      ->capture_default_str()
      ->check(CLI::IsMember({"conj", "exactly", "atleast"}));
  app.add_option("-k", k, "count for exactly/atleast")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    std::vector<Trace> inputs;
    for (int s = 1; s <= traces; ++s) {
      ScenarioConfig c;
      c.n = n;
      c.epsilon = 4;
      c.delta = 3;
      c.duration = duration;
      c.mfr = 0.05;
      c.seed = static_cast<std::uint64_t>(s);
      c.workload = SyntheticWorkload{0.08, 3, ValueDomain::Boolean};
      inputs.push_back(run(c));
    }
    const OracleLimits limits{4, 40, 12};
    const Predicate p = form == "conj"      ? Predicate::conjunction()
                        : form == "exactly" ? Predicate::exactly(k)
                                            : Predicate::at_least(k);
    using clock = std::chrono::steady_clock;

    int mismatches = 0, sat = 0;
    auto t0 = clock::now();
    std::vector<bool> serial;
    for (const auto& t : inputs) serial.push_back(find_valid_snapshot_serial(t, p, t.epsilon, limits).has_value());
    auto t1 = clock::now();
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const bool par = find_valid_snapshot(inputs[i], p, inputs[i].epsilon, limits).has_value();
      mismatches += par != serial[i];
      sat += par;
    }
    auto t2 = clock::now();

    const double ser_s = std::chrono::duration<double>(t1 - t0).count();
    const double par_s = std::chrono::duration<double>(t2 - t1).count();
    std::printf("traces %d  sat %d  threads %d\n", traces, sat, omp_get_max_threads());
    std::printf("serial   %.3f s\nparallel %.3f s\nspeedup  %.2fx\nmismatches %d\n", ser_s, par_s,
                par_s > 0 ? ser_s / par_s : 0.0, mismatches);
    return mismatches == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "bench_oracle: %s\n", e.what());
    return 1;
  }
}
