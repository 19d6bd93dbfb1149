#include "pwr/waveform.hpp"

#include "pwr/error.hpp"

namespace pwr {

Waveform Waveform::constant(const TimeGrid& grid, const std::vector<double>& values) {
  Waveform w;
  w.grid = grid;
  const auto v = static_cast<Eigen::Index>(values.size());
  w.x.resize(static_cast<Eigen::Index>(grid.points()), v);
  for (Eigen::Index k = 0; k < w.x.rows(); ++k)
    for (Eigen::Index j = 0; j < v; ++j) w.x(k, j) = values[static_cast<std::size_t>(j)];
  w.dx = Eigen::MatrixXd::Zero(w.x.rows(), v);
  return w;
}

void Waveform::interpolate(double t, double* out) const { as_trajectory().interpolate(t, out); }

double sup_distance(const Waveform& a, const Waveform& b) {
  if (a.x.rows() != b.x.rows() || a.x.cols() != b.x.cols())
    throw Error(ErrorKind::length_mismatch, "waveforms live on different grids");
  if (a.x.size() == 0) return 0.0;
  return (a.x - b.x).cwiseAbs().maxCoeff();
}

}  // namespace pwr
