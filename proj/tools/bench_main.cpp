// Benchmark: the OpenMP replicate kernel against the serial reference on
// identical cells, verifying that the two paths produce identical records.

#include <chrono>
#include <cstring>
#include <iostream>

#include <omp.h>

#include "CLI11.hpp"

#include "milab/io.hpp"
#include "milab/simulator.hpp"

namespace {

double elapsed_ms(const std::chrono::steady_clock::time_point& start) {
  const auto end = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(end - start).count();
}

bool records_equal(const std::vector<milab::ReplicateRecord>& a,
                   const std::vector<milab::ReplicateRecord>& b) {
  if (a.size() != b.size()) {
    return false;
  }
  return std::memcmp(a.data(), b.data(),
                     a.size() * sizeof(milab::ReplicateRecord)) == 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"milab_bench: serial reference vs OpenMP kernel"};
  int reps = 200;
  int n = 1000;
  int threads = 0;
  std::uint64_t seed = 44;
  app.add_option("--reps", reps, "Replicates per cell");
  app.add_option("--n", n, "Sample size");
  app.add_option("--threads", threads, "Worker threads (0 = OpenMP default)");
  app.add_option("--seed", seed, "Master seed");
  CLI11_PARSE(app, argc, argv);

  const int num_threads = threads > 0 ? threads : omp_get_max_threads();

  std::cout << "cell,reps,serial_ms,parallel_ms,threads,speedup,identical\n";
  bool all_identical = true;
  for (const milab::Method method :
       {milab::Method::Regression, milab::Method::Pmm}) {
    milab::ExperimentCell cell;
    cell.rho = 0.8;
    cell.mechanism = milab::Mechanism::mar();
    cell.n = n;
    cell.method = method;
    cell.reps = reps;
    cell.master_seed = seed;

    auto start = std::chrono::steady_clock::now();
    const milab::CellOutput serial = milab::run_cell_serial(cell);
    const double serial_ms = elapsed_ms(start);

    start = std::chrono::steady_clock::now();
    const milab::CellOutput parallel = milab::run_cell(cell, num_threads);
    const double parallel_ms = elapsed_ms(start);

    const bool identical = records_equal(serial.records, parallel.records);
    all_identical = all_identical && identical;
    std::cout << milab::cell_id(cell) << ',' << reps << ',' << serial_ms << ','
              << parallel_ms << ',' << num_threads << ','
              << serial_ms / parallel_ms << ',' << (identical ? "yes" : "no")
              << '\n';
  }
  return all_identical ? 0 : 1;
}
