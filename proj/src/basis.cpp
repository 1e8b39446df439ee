#include "grade2/basis.hpp"

#include "grade2/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

namespace grade2 {

namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

constexpr double kClusterGap = 1e-9;

// Columns of nodal samples for a list of stream functions.
ModeSamples sample_streams(const DiskGrid& grid, const std::vector<PolarPolynomial>& streams,
                           const PhysicalParams& p) {
  const Eigen::Index N = grid.size();
  const Eigen::Index n = static_cast<Eigen::Index>(streams.size());
  ModeSamples s;
  for (Matrix* m : {&s.u1, &s.u2, &s.d11, &s.d22, &s.d12, &s.curl, &s.curl_upsilon}) m->resize(N, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const VectorPolynomial v = VectorPolynomial::from_stream(streams[i]);
    s.u1.col(i) = v.x1.sample(grid).values;
    s.u2.col(i) = v.x2.sample(grid).values;
    const Deformation d = deformation(grid, v);
    s.d11.col(i) = d.d11.values;
    s.d22.col(i) = d.d22.values;
    s.d12.col(i) = d.d12.values;
    const PolarPolynomial w = streams[i].laplacian();
    s.curl.col(i) = w.sample(grid).values;
    s.curl_upsilon.col(i) = (w - p.alpha * w.laplacian()).sample(grid).values;
  }
  return s;
}

Matrix weighted_gram(const Matrix& a, const Matrix& b, const Vector& w) { return a.transpose() * w.asDiagonal() * b; }

struct GramParts {
  Matrix mass, deformation, boundary, curl_upsilon;
};

GramParts gram_parts(const DiskGrid& grid, const ModeSamples& s) {
  const Vector& w = grid.domain_weights();
  const Vector& wb = grid.boundary_weights();
  const Eigen::Index nb = grid.n_angular();
  GramParts g;
  g.mass = weighted_gram(s.u1, s.u1, w) + weighted_gram(s.u2, s.u2, w);
  g.deformation =
      weighted_gram(s.d11, s.d11, w) + weighted_gram(s.d22, s.d22, w) + 2.0 * weighted_gram(s.d12, s.d12, w);
  g.boundary = weighted_gram(s.u1.bottomRows(nb), s.u1.bottomRows(nb), wb) +
               weighted_gram(s.u2.bottomRows(nb), s.u2.bottomRows(nb), wb);
  g.curl_upsilon = weighted_gram(s.curl_upsilon, s.curl_upsilon, w);
  return g;
}

Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

Matrix v_gram(const GramParts& g, const PhysicalParams& p) {
  return symmetrized(g.mass + 2.0 * p.alpha * g.deformation + p.alpha * p.gamma * g.boundary);
}

struct Candidate {
  double lambda;
  int block;
  ModeLabel label;
  Vector x;
};

bool label_order(const Candidate& a, const Candidate& b) {
  if (a.label.m != b.label.m) return a.label.m < b.label.m;
  if (a.label.radial != b.label.radial) return a.label.radial < b.label.radial;
  return a.label.parity < b.label.parity;
}

// Sort by eigenvalue; inside clusters of numerically equal eigenvalues order
// by (m, radial index, cos before sin).
void order_candidates(std::vector<Candidate>& c) {
  std::stable_sort(c.begin(), c.end(), [](const Candidate& a, const Candidate& b) { return a.lambda < b.lambda; });
  std::size_t start = 0;
  while (start < c.size()) {
    std::size_t end = start + 1;
    while (end < c.size() && c[end].lambda - c[end - 1].lambda <= kClusterGap * std::abs(c[end - 1].lambda)) ++end;
    std::sort(c.begin() + start, c.begin() + end, label_order);
    start = end;
  }
}

void resolve_limits(const DiskGrid& grid, BasisOptions& opts) {
  if (opts.mode_limit < 0) opts.mode_limit = default_trial_mode_limit(grid);
  if (opts.degree_limit < 0) opts.degree_limit = default_trial_degree_limit(grid);
}

int block_index(const std::vector<TrialBlock>& blocks, int m) {
  for (std::size_t b = 0; b < blocks.size(); ++b)
    if (blocks[b].m == m) return static_cast<int>(b);
  return -1;
}

// Fills streams, modes, samples and Grams from labels and coordinates.
void finish_basis(const DiskGrid& grid, const std::vector<TrialBlock>& blocks, GalerkinBasis& basis) {
  basis.streams.clear();
  basis.modes.clear();
  for (int i = 0; i < basis.n_modes; ++i) {
    const ModeLabel& l = basis.labels[i];
    const TrialBlock& b = blocks[block_index(blocks, l.m)];
    basis.streams.push_back(b.stream(basis.trial_coordinates[i], l.parity));
  }
  basis.samples = sample_streams(grid, basis.streams, basis.params);
  for (int i = 0; i < basis.n_modes; ++i)
    basis.modes.push_back({ScalarField(basis.samples.u1.col(i)), ScalarField(basis.samples.u2.col(i))});
  const GramParts g = gram_parts(grid, basis.samples);
  basis.gram_V = v_gram(g, basis.params);
  basis.gram_Wtilde = symmetrized(basis.gram_V + g.curl_upsilon);
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

void append_le(std::string& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

double read_le(const std::string& in, std::size_t pos) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= std::uint64_t(static_cast<unsigned char>(in[pos + b])) << (8 * b);
  return std::bit_cast<double>(bits);
}

std::string cache_stem(int nr, int M, double alpha, double gamma, int n, int ml, int dl) {
  std::ostringstream s;
  s.precision(17);
  s << "basis_" << nr << "x" << M << "_a" << alpha << "_g" << gamma << "_n" << n << "_m" << ml << "_d" << dl;
  return s.str();
}

}  // namespace

PolarPolynomial TrialBlock::raw_stream(const Eigen::VectorXd& a, int parity) const {
  // cos: Re(z^m T_k); sin: Re(-i z^m T_k) = r^m T_k sin(m theta).
  const std::complex<double> unit = parity == 0 ? std::complex<double>(1.0, 0.0) : std::complex<double>(0.0, -1.0);
  PolarPolynomial out;
  for (int k = 0; k < raw_count; ++k)
    if (a[k] != 0.0) out += PolarPolynomial::monomial(m, k, unit * a[k]);
  return out;
}

std::array<double, 3> raw_boundary_values(int m, int k) {
  const double k2 = double(k) * k;
  return {1.0, m + 4.0 * k2, double(m) * (m - 1) + (8.0 * m + 4.0) * k2 + 16.0 * k2 * (k2 - 1.0) / 3.0};
}

std::vector<TrialBlock> trial_blocks(double gamma, int m_max, int d_max) {
  std::vector<TrialBlock> out;
  for (int m = 0; m <= m_max; ++m) {
    const int K = (d_max - m) / 2 + 1;
    if (d_max < m || K < 3) continue;
    // Rows: psi(1) = 0 and g'' + (gamma - 1) g' - m^2 g = 0 at r = 1.
    Matrix C(2, K);
    for (int k = 0; k < K; ++k) {
      const auto [r0, r1, r2] = raw_boundary_values(m, k);
      C(0, k) = r0;
      C(1, k) = r2 + (gamma - 1.0) * r1 - double(m) * m * r0;
    }
    // Banded recombination phi_k = R_k + a R_{k+1} + b R_{k+2}: each trial
    // function mixes neighbouring degrees only, which keeps the Gram matrices
    // diagonally dominant after scaling.
    Matrix null = Matrix::Zero(K, K - 2);
    for (int k = 0; k + 2 < K; ++k) {
      const Eigen::Vector2d ab = C.middleCols(k + 1, 2).partialPivLu().solve(-C.col(k));
      null(k, k) = 1.0;
      null(k + 1, k) = ab[0];
      null(k + 2, k) = ab[1];
    }
    out.push_back({m, K, null});
  }
  return out;
}

int default_trial_mode_limit(const DiskGrid& grid) { return std::max(0, grid.n_angular_modes() - 4); }
int default_trial_degree_limit(const DiskGrid& grid) { return grid.n_radial(); }

PolarPolynomial random_trial_stream(const std::vector<TrialBlock>& blocks, PhiloxEngine& rng) {
  PolarPolynomial psi;
  for (const TrialBlock& b : blocks) {
    for (int parity = 0; parity < b.parities(); ++parity) {
      Vector x(b.size());
      for (int k = 0; k < b.size(); ++k) x[k] = rng.normal() / ((1.0 + k) * (1.0 + k) * (1.0 + b.m));
      psi += b.stream(x, parity);
    }
  }
  return psi;
}

ModeSamples ModeSamples::leading(int n) const {
  return {u1.leftCols(n), u2.leftCols(n), d11.leftCols(n), d22.leftCols(n),
          d12.leftCols(n), curl.leftCols(n), curl_upsilon.leftCols(n)};
}

GalerkinBasis GalerkinBasis::truncated(int n) const {
  if (n < 1 || n > n_modes) throw ConfigError("basis.n_modes: cannot truncate " + std::to_string(n_modes) +
                                              " modes to " + std::to_string(n));
  GalerkinBasis out = *this;
  out.n_modes = n;
  out.eigenvalues = eigenvalues.head(n);
  out.labels.resize(n);
  out.trial_coordinates.resize(n);
  out.streams.resize(n);
  out.modes.resize(n);
  out.samples = samples.leading(n);
  out.gram_V = gram_V.topLeftCorner(n, n);
  out.gram_Wtilde = gram_Wtilde.topLeftCorner(n, n);
  return out;
}

int trial_dimension(const DiskGrid& grid, BasisOptions opts) {
  resolve_limits(grid, opts);
  int dim = 0;
  for (const TrialBlock& b : trial_blocks(1.0, opts.mode_limit, opts.degree_limit)) dim += b.size() * b.parities();
  return dim;
}

GalerkinBasis build_basis(const DiskGrid& grid, const PhysicalParams& p, int n_modes, BasisOptions opts) {
  p.validate();
  resolve_limits(grid, opts);
  const std::vector<TrialBlock> blocks = trial_blocks(p.gamma, opts.mode_limit, opts.degree_limit);
  int dim = 0;
  for (const TrialBlock& b : blocks) dim += b.size() * b.parities();
  if (n_modes < 1 || n_modes > dim)
    throw ConfigError("basis.n_modes must lie in [1, " + std::to_string(dim) + "] for this grid, got " +
                      std::to_string(n_modes));

  std::vector<Candidate> cands;
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const TrialBlock& b = blocks[bi];
    // Gram matrices of the cos functions; the sin block is its rotation and
    // shares them, so one eigensolve serves both parities.
    std::vector<PolarPolynomial> trial;
    for (int k = 0; k < b.size(); ++k) trial.push_back(b.stream(Vector::Unit(b.size(), k), 0));
    const GramParts g = gram_parts(grid, sample_streams(grid, trial, p));
    const Matrix B0 = v_gram(g, p);
    const Matrix A0 = B0 + g.curl_upsilon;
    // Quadrature errors are relative to each diagonal entry; scaling by
    // diag(A)^(-1/2) keeps them from swamping the smallest eigenvalues.
    const Vector scale = A0.diagonal().cwiseSqrt().cwiseInverse();
    const Matrix A = symmetrized(scale.asDiagonal() * A0 * scale.asDiagonal());
    const Matrix B = symmetrized(scale.asDiagonal() * B0 * scale.asDiagonal());
    const Eigen::LLT<Matrix> llt(B);
    if (llt.info() != Eigen::Success)
      throw NumericalError("V Gram matrix of angular mode " + std::to_string(b.m) + " is not positive definite");
    const Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(A, B);
    if (es.info() != Eigen::Success)
      throw NumericalError("generalized eigensolve failed for angular mode " + std::to_string(b.m));
    for (int j = 0; j < b.size(); ++j) {
      Vector x = scale.cwiseProduct(es.eigenvectors().col(j));
      const Vector a = b.null * x;
      Eigen::Index imax;
      a.cwiseAbs().maxCoeff(&imax);
      if (a[imax] < 0) x = -x;
      for (int parity = 0; parity < b.parities(); ++parity)
        cands.push_back({es.eigenvalues()[j], static_cast<int>(bi), {b.m, parity, j}, x});
    }
  }
  order_candidates(cands);

  GalerkinBasis basis;
  basis.n_modes = n_modes;
  basis.params = p;
  basis.n_radial = grid.n_radial();
  basis.n_angular_modes = grid.n_angular_modes();
  basis.mode_limit = opts.mode_limit;
  basis.degree_limit = opts.degree_limit;
  basis.eigenvalues.resize(n_modes);
  for (int i = 0; i < n_modes; ++i) {
    basis.eigenvalues[i] = cands[i].lambda;
    basis.labels.push_back(cands[i].label);
    basis.trial_coordinates.push_back(cands[i].x);
  }
  finish_basis(grid, blocks, basis);
  return basis;
}

Eigen::VectorXd project(const DiskGrid& grid, const VectorField& y, const GalerkinBasis& basis) {
  if (y.size() != grid.size()) throw ShapeError("project: field does not match the grid");
  const PhysicalParams& p = basis.params;
  const ModeSamples& s = basis.samples;
  const Vector& w = grid.domain_weights();
  const Vector& wb = grid.boundary_weights();
  const Eigen::Index nb = grid.n_angular();
  const Deformation d = deformation(grid, y);
  Vector c = s.u1.transpose() * w.cwiseProduct(y.x1.values) + s.u2.transpose() * w.cwiseProduct(y.x2.values);
  c += 2.0 * p.alpha *
       (s.d11.transpose() * w.cwiseProduct(d.d11.values) + s.d22.transpose() * w.cwiseProduct(d.d22.values) +
        2.0 * (s.d12.transpose() * w.cwiseProduct(d.d12.values)));
  c += p.alpha * p.gamma *
       (s.u1.bottomRows(nb).transpose() * wb.cwiseProduct(grid.boundary_values(y.x1)) +
        s.u2.bottomRows(nb).transpose() * wb.cwiseProduct(grid.boundary_values(y.x2)));
  return c;
}

VectorField reconstruct(const Eigen::VectorXd& c, const GalerkinBasis& basis) {
  if (c.size() != basis.n_modes)
    throw ShapeError("reconstruct: expected " + std::to_string(basis.n_modes) + " coefficients, got " +
                     std::to_string(c.size()));
  return {ScalarField(basis.samples.u1 * c), ScalarField(basis.samples.u2 * c)};
}

PolarPolynomial reconstruct_stream(const Eigen::VectorXd& c, const GalerkinBasis& basis) {
  if (c.size() != basis.n_modes) throw ShapeError("reconstruct_stream: coefficient length mismatch");
  PolarPolynomial psi;
  for (int i = 0; i < basis.n_modes; ++i)
    if (c[i] != 0.0) psi += c[i] * basis.streams[i];
  return psi;
}

BasisGrams compute_grams(const DiskGrid& grid, const GalerkinBasis& basis) {
  const ModeSamples& s = basis.samples;
  const Vector& w = grid.domain_weights();
  const GramParts g = gram_parts(grid, s);
  BasisGrams out;
  out.mass = symmetrized(g.mass);
  out.deformation = symmetrized(g.deformation);
  out.boundary = symmetrized(g.boundary);
  out.curl_upsilon = symmetrized(g.curl_upsilon);
  out.curl_curl_upsilon = weighted_gram(s.curl, s.curl_upsilon, w);

  // H^3: every distinct derivative d1^a d2^b, a + b <= 3, of both components.
  const int n = basis.n_modes;
  const Eigen::Index N = grid.size();
  std::vector<Matrix> derivs;
  for (int comp = 0; comp < 2; ++comp) {
    for (int b = 0; b <= 3; ++b)
      for (int a = 0; a + b <= 3; ++a) derivs.emplace_back(N, n);
    for (int i = 0; i < n; ++i) {
      const VectorPolynomial v = VectorPolynomial::from_stream(basis.streams[i]);
      PolarPolynomial col = comp == 0 ? v.x1 : v.x2;
      std::size_t slot = derivs.size() - 10;
      for (int b = 0; b <= 3; ++b) {
        PolarPolynomial d = col;
        for (int a = 0; a + b <= 3; ++a) {
          derivs[slot++].col(i) = d.sample(grid).values;
          if (a + b < 3) d = d.dx1();
        }
        col = col.dx2();
      }
    }
  }
  out.h3 = Matrix::Zero(n, n);
  for (const Matrix& d : derivs) out.h3 += weighted_gram(d, d, w);
  out.h3 = symmetrized(out.h3);

  Matrix pv1(N, n), pv2(N, n);
  for (int i = 0; i < n; ++i) {
    const VectorField v = upsilon(VectorPolynomial::from_stream(basis.streams[i]), basis.params).sample(grid);
    const VectorField pv = helmholtz_project(grid, v);
    pv1.col(i) = pv.x1.values;
    pv2.col(i) = pv.x2.values;
  }
  out.projected_upsilon = symmetrized(weighted_gram(pv1, pv1, w) + weighted_gram(pv2, pv2, w));
  return out;
}

void save_basis_cache(const std::filesystem::path& dir, const GalerkinBasis& basis) {
  std::filesystem::create_directories(dir);
  const std::string stem = cache_stem(basis.n_radial, basis.n_angular_modes, basis.params.alpha, basis.params.gamma,
                                      basis.n_modes, basis.mode_limit, basis.degree_limit);
  std::string payload;
  nlohmann::json labels = nlohmann::json::array();
  for (int i = 0; i < basis.n_modes; ++i) {
    append_le(payload, basis.eigenvalues[i]);
    for (double v : basis.trial_coordinates[i]) append_le(payload, v);
    const ModeLabel& l = basis.labels[i];
    labels.push_back({l.m, l.parity, l.radial, basis.trial_coordinates[i].size()});
  }
  nlohmann::json meta = {{"n_radial", basis.n_radial},
                         {"n_angular_modes", basis.n_angular_modes},
                         {"alpha", basis.params.alpha},
                         {"gamma", basis.params.gamma},
                         {"n_modes", basis.n_modes},
                         {"mode_limit", basis.mode_limit},
                         {"degree_limit", basis.degree_limit},
                         {"layout", "per mode: eigenvalue then trial coordinates; float64 little-endian"},
                         {"labels", labels},
                         {"bytes", payload.size()},
                         {"fnv1a64", fnv1a(payload)}};
  std::ofstream(dir / (stem + ".bin"), std::ios::binary) << payload;
  std::ofstream(dir / (stem + ".json")) << meta.dump(2) << "\n";
}

std::optional<GalerkinBasis> load_basis_cache(const std::filesystem::path& dir, const DiskGrid& grid,
                                              const PhysicalParams& p, int n_modes, BasisOptions opts) {
  resolve_limits(grid, opts);
  const std::string stem =
      cache_stem(grid.n_radial(), grid.n_angular_modes(), p.alpha, p.gamma, n_modes, opts.mode_limit, opts.degree_limit);
  std::ifstream meta_in(dir / (stem + ".json"));
  std::ifstream bin_in(dir / (stem + ".bin"), std::ios::binary);
  if (!meta_in || !bin_in) return std::nullopt;
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(meta_in);
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
  const std::string payload((std::istreambuf_iterator<char>(bin_in)), std::istreambuf_iterator<char>());
  if (meta.value("bytes", std::size_t(0)) != payload.size() || meta.value("fnv1a64", std::uint64_t(0)) != fnv1a(payload))
    return std::nullopt;
  if (meta.value("alpha", 0.0) != p.alpha || meta.value("gamma", 0.0) != p.gamma ||
      meta.value("n_modes", 0) != n_modes)
    return std::nullopt;

  const std::vector<TrialBlock> blocks = trial_blocks(p.gamma, opts.mode_limit, opts.degree_limit);
  GalerkinBasis basis;
  basis.n_modes = n_modes;
  basis.params = p;
  basis.n_radial = grid.n_radial();
  basis.n_angular_modes = grid.n_angular_modes();
  basis.mode_limit = opts.mode_limit;
  basis.degree_limit = opts.degree_limit;
  basis.eigenvalues.resize(n_modes);
  std::size_t pos = 0;
  const nlohmann::json& labels = meta.at("labels");
  if (labels.size() != std::size_t(n_modes)) return std::nullopt;
  for (int i = 0; i < n_modes; ++i) {
    const ModeLabel l{labels[i][0].get<int>(), labels[i][1].get<int>(), labels[i][2].get<int>()};
    const int len = labels[i][3].get<int>();
    const int bi = block_index(blocks, l.m);
    if (bi < 0 || blocks[bi].size() != len || pos + 8 * (len + 1) > payload.size()) return std::nullopt;
    basis.eigenvalues[i] = read_le(payload, pos);
    pos += 8;
    Vector x(len);
    for (int k = 0; k < len; ++k, pos += 8) x[k] = read_le(payload, pos);
    basis.labels.push_back(l);
    basis.trial_coordinates.push_back(x);
  }
  finish_basis(grid, blocks, basis);
  return basis;
}

}  // namespace grade2
