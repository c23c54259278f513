#include "covalign/instances.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "covalign/error.hpp"
#include "covalign/matrix_io.hpp"

namespace covalign {

std::string_view to_string(InstanceKind kind) {
  switch (kind) {
    case InstanceKind::robinson: return "robinson";
    case InstanceKind::wishart: return "wishart";
    case InstanceKind::hard: return "hard";
    case InstanceKind::custom_file: return "custom-file";
  }
  return "unknown";
}

std::string_view to_string(Normalization norm) {
  switch (norm) {
    case Normalization::none: return "none";
    case Normalization::opnorm: return "opnorm";
    case Normalization::trace: return "trace";
  }
  return "unknown";
}

InstanceKind parse_instance_kind(std::string_view text) {
  if (text == "robinson") return InstanceKind::robinson;
  if (text == "wishart") return InstanceKind::wishart;
  if (text == "hard") return InstanceKind::hard;
  if (text == "custom-file") return InstanceKind::custom_file;
  throw Error(ErrorKind::InvalidArgument, "unknown instance kind '" + std::string(text) + "'");
}

Normalization parse_normalization(std::string_view text) {
  if (text == "none") return Normalization::none;
  if (text == "opnorm") return Normalization::opnorm;
  if (text == "trace") return Normalization::trace;
  throw Error(ErrorKind::InvalidArgument, "unknown normalization '" + std::string(text) + "'");
}

void InstanceSpec::validate() const {
  if (kind != InstanceKind::custom_file && d < 2) {
    throw Error(ErrorKind::InvalidArgument, "instance dimension must be at least 2");
  }
  if (kind == InstanceKind::robinson && !(gamma > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "robinson gamma must be positive");
  }
  if (!(c1 > 0.0) || !(c5 > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "hard-instance constants c1, c5 must be positive");
  }
  if (kind == InstanceKind::custom_file && path.empty()) {
    throw Error(ErrorKind::InvalidArgument, "custom-file instances need a matrix path");
  }
}

SymMatrix robinson(std::size_t d, double gamma) {
  if (d < 1 || !(gamma > 0.0)) throw Error(ErrorKind::InvalidArgument, "robinson needs d >= 1, gamma > 0");
  const auto n = static_cast<Eigen::Index>(d);
  Matrix s(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      s(i, j) = std::pow(1.0 + static_cast<double>(std::abs(i - j)), -gamma);
    }
  }
  return SymMatrix(std::move(s));
}

SymMatrix wishart(std::size_t d, Rng& rng, Normalization normalize) {
  if (d < 1) throw Error(ErrorKind::InvalidArgument, "wishart needs d >= 1");
  const auto n = static_cast<Eigen::Index>(d);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) g(i, k) = normal(rng);
  }
  SymMatrix sigma = symmetrize(g * g.transpose());
  switch (normalize) {
    case Normalization::none: break;
    case Normalization::opnorm: sigma = sigma * (1.0 / operator_norm(sigma)); break;
    case Normalization::trace: sigma = sigma * (1.0 / sigma.trace()); break;
  }
  return sigma;
}

SymMatrix rademacher_symmetric(std::size_t d, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(d);
  std::bernoulli_distribution coin(0.5);
  Matrix s(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double v = coin(rng) ? 1.0 : -1.0;
      s(i, j) = v;
      s(j, i) = v;
    }
  }
  return SymMatrix(std::move(s));
}

double hard_eta(std::size_t d, double m, double n, double c1, double c5) {
  const double dd = static_cast<double>(d);
  const double logd = std::log(dd);
  const double first = std::sqrt(logd / (n * dd));
  const double second = std::pow(logd / (m * n * dd), 0.25);
  const double eta = c5 * std::max(first, second);
  const double bound = 1.0 / (2.0 * c1 * std::sqrt(dd));
  // Open interval: keep a relative margin from both ends.
  return std::clamp(eta, 1e-9 * bound, (1.0 - 1e-9) * bound);
}

HardInstance hard_instance(std::size_t d, SampleSize m, SampleSize n, double c1, double c5, Rng& rng) {
  if (d < 2) throw Error(ErrorKind::InvalidArgument, "hard_instance needs d >= 2");
  if (!(c1 > 0.0) || !(c5 > 0.0)) throw Error(ErrorKind::InvalidArgument, "c1, c5 must be positive");
  constexpr int kMaxDraws = 1000;
  const double limit = c1 * std::sqrt(static_cast<double>(d));

  HardInstance out;
  for (int draw = 1; draw <= kMaxDraws; ++draw) {
    SymMatrix s = rademacher_symmetric(d, rng);
    if (operator_norm(s) <= limit) {
      out.sign_matrix = std::move(s);
      out.draws = draw;
      break;
    }
  }
  if (out.draws == 0) {
    throw Error(ErrorKind::RejectionBudgetExceeded,
                "no sign matrix with operator norm <= c1*sqrt(d) in 1000 draws; increase c1");
  }
  const double inf = std::numeric_limits<double>::infinity();
  const double mm = m.is_exact() ? inf : static_cast<double>(m.count());
  const double nn = n.is_exact() ? inf : static_cast<double>(n.count());
  out.eta = hard_eta(d, mm, nn, c1, c5);
  out.sigma = (SymMatrix::identity(d) + out.sign_matrix * out.eta) * 0.5;
  return out;
}

AlignmentInstance make_instance(const InstanceSpec& spec) {
  spec.validate();
  Rng rng = make_rng(spec.seed);

  AlignmentInstance inst;
  inst.seed = spec.seed;
  inst.m = spec.m;
  inst.n = spec.n;
  switch (spec.kind) {
    case InstanceKind::robinson: inst.sigma = robinson(spec.d, spec.gamma); break;
    case InstanceKind::wishart: inst.sigma = wishart(spec.d, rng, spec.normalize); break;
    case InstanceKind::hard: inst.sigma = hard_instance(spec.d, spec.m, spec.n, spec.c1, spec.c5, rng).sigma; break;
    case InstanceKind::custom_file:
      inst.sigma = read_matrix_csv(spec.path);
      if (spec.d != 0 && spec.d != inst.sigma.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "custom-file matrix is " + std::to_string(inst.sigma.dim()) +
                                                      "x" + std::to_string(inst.sigma.dim()) + ", expected d=" +
                                                      std::to_string(spec.d));
      }
      break;
  }
  if (spec.kind == InstanceKind::robinson || spec.kind == InstanceKind::custom_file) {
    switch (spec.normalize) {
      case Normalization::none: break;
      case Normalization::opnorm: inst.sigma = inst.sigma * (1.0 / operator_norm(inst.sigma)); break;
      case Normalization::trace: inst.sigma = inst.sigma * (1.0 / inst.sigma.trace()); break;
    }
  }

  const std::size_t d = inst.sigma.dim();
  inst.pi_star = random_permutation(d, rng);
  const SymMatrix sigma_y = perm_apply(inst.sigma, inst.pi_star);

  if (spec.m.is_exact()) {
    inst.sigma_hat_x = inst.sigma;
  } else {
    inst.x_data = sample_gaussian(inst.sigma, static_cast<std::size_t>(spec.m.count()), rng);
    inst.sigma_hat_x = sample_covariance(*inst.x_data);
  }
  if (spec.n.is_exact()) {
    inst.sigma_hat_y = sigma_y;
  } else {
    inst.y_data = sample_gaussian(sigma_y, static_cast<std::size_t>(spec.n.count()), rng);
    inst.sigma_hat_y = sample_covariance(*inst.y_data);
  }
  return inst;
}

}  // namespace covalign
