#include "normcrit/assembly.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>

namespace normcrit {

namespace {

// 1D P1 matrices on [lo, hi] with n cells.
SparseMatrix stiffness_1d(double length, Index n) {
  const double h = length / static_cast<double>(n);
  SparseMatrix K(n + 1, n + 1);
  std::vector<Triplet> t;
  t.reserve(3 * (n + 1));
  for (Index e = 0; e < n; ++e) {
    const double k = 1.0 / h;
    t.emplace_back(e, e, k);
    t.emplace_back(e + 1, e + 1, k);
    t.emplace_back(e, e + 1, -k);
    t.emplace_back(e + 1, e, -k);
  }
  K.setFromTriplets(t.begin(), t.end());
  return K;
}

SparseMatrix mass_1d(double length, Index n) {
  const double h = length / static_cast<double>(n);
  SparseMatrix M(n + 1, n + 1);
  std::vector<Triplet> t;
  t.reserve(3 * (n + 1));
  for (Index e = 0; e < n; ++e) {
    t.emplace_back(e, e, h / 3.0);
    t.emplace_back(e + 1, e + 1, h / 3.0);
    t.emplace_back(e, e + 1, h / 6.0);
    t.emplace_back(e + 1, e, h / 6.0);
  }
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

SparseMatrix endpoint_atom(Index n, Index which) {
  SparseMatrix E(n + 1, n + 1);
  E.insert(which, which) = 1.0;
  E.makeCompressed();
  return E;
}

// Kronecker product with B acting on the fast index: (A kron B)(ia*nb+ib, ...).
SparseMatrix kron(const SparseMatrix& A, const SparseMatrix& B) {
  SparseMatrix C(A.rows() * B.rows(), A.cols() * B.cols());
  std::vector<Triplet> t;
  t.reserve(static_cast<size_t>(A.nonZeros()) * B.nonZeros());
  for (Index ka = 0; ka < A.outerSize(); ++ka)
    for (SparseMatrix::InnerIterator ita(A, ka); ita; ++ita)
      for (Index kb = 0; kb < B.outerSize(); ++kb)
        for (SparseMatrix::InnerIterator itb(B, kb); itb; ++itb)
          t.emplace_back(ita.row() * B.rows() + itb.row(),
                         ita.col() * B.cols() + itb.col(),
                         ita.value() * itb.value());
  C.setFromTriplets(t.begin(), t.end());
  return C;
}

}  // namespace

std::array<double, 3> Discretization::node_coords(Index node) const {
  std::array<double, 3> x{0.0, 0.0, 0.0};
  Index rem = node;
  for (int d = 0; d < domain.dimension; ++d) {
    const Index i = rem % nodes_per_axis[d];
    rem /= nodes_per_axis[d];
    x[d] = domain.lo[d] + axis_spacing(d) * static_cast<double>(i);
  }
  return x;
}

Discretization assemble(const DomainSpec& domain_in, int n_per_axis) {
  if (n_per_axis < 4)
    fail(ErrorCode::ResolutionTooSmall, "need n_per_axis >= 4");
  const DomainSpec domain = build_domain(domain_in);
  const int N = domain.dimension;
  const Index n = n_per_axis;

  Discretization disc;
  disc.domain = domain;
  disc.n_per_axis = n_per_axis;
  disc.num_nodes = 1;
  disc.h = 0.0;
  for (int d = 0; d < N; ++d) {
    disc.nodes_per_axis[d] = n + 1;
    disc.num_nodes *= n + 1;
    disc.h = std::max(disc.h, domain.extent(d) / static_cast<double>(n));
  }
  for (int d = N; d < 3; ++d) disc.nodes_per_axis[d] = 1;

  std::array<SparseMatrix, 3> K1, M1;
  for (int d = 0; d < N; ++d) {
    K1[d] = stiffness_1d(domain.extent(d), n);
    M1[d] = mass_1d(domain.extent(d), n);
  }

  if (N == 1) {
    disc.K = K1[0];
    disc.M = M1[0];
    disc.B = endpoint_atom(n, 0) + endpoint_atom(n, n);
  } else if (N == 2) {
    disc.K = kron(M1[1], K1[0]) + kron(K1[1], M1[0]);
    disc.M = kron(M1[1], M1[0]);
    disc.B = kron(M1[1], SparseMatrix(endpoint_atom(n, 0) + endpoint_atom(n, n))) +
             kron(SparseMatrix(endpoint_atom(n, 0) + endpoint_atom(n, n)), M1[0]);
  } else {
    const SparseMatrix Ex = endpoint_atom(n, 0) + endpoint_atom(n, n);
    disc.K = kron(M1[2], kron(M1[1], K1[0])) +
             kron(M1[2], kron(K1[1], M1[0])) +
             kron(K1[2], kron(M1[1], M1[0]));
    disc.M = kron(M1[2], kron(M1[1], M1[0]));
    disc.B = kron(M1[2], kron(M1[1], Ex)) + kron(M1[2], kron(Ex, M1[0])) +
             kron(Ex, kron(M1[1], M1[0]));
  }
  disc.K.makeCompressed();
  disc.M.makeCompressed();
  disc.B.makeCompressed();

  disc.on_boundary.assign(disc.num_nodes, false);
  for (Index node = 0; node < disc.num_nodes; ++node) {
    Index rem = node;
    bool bdry = false;
    for (int d = 0; d < N; ++d) {
      const Index i = rem % disc.nodes_per_axis[d];
      rem /= disc.nodes_per_axis[d];
      if (i == 0 || i == n) bdry = true;
    }
    disc.on_boundary[node] = bdry;
    (bdry ? disc.boundary_nodes : disc.interior_nodes).push_back(node);
  }

  disc.P = pohozaev_weights(disc, *domain.star_center);
  return disc;
}

Vector pohozaev_weights(const Discretization& disc,
                        const std::array<double, 3>& x0) {
  const DomainSpec& dom = disc.domain;
  if (!dom.contains_interior(x0))
    fail(ErrorCode::CenterOutsideDomain, "x0 must be strictly interior");
  const int N = dom.dimension;
  const Index n = disc.n_per_axis;

  // On face {x_d = lo_d / hi_d} the weight (x - x0).n is the constant
  // distance from x0 to the face plane, so P is a scaled boundary mass.
  Vector P = Vector::Zero(disc.num_nodes);
  Vector ones = Vector::Ones(disc.num_nodes);
  for (int d = 0; d < N; ++d) {
    for (int side = 0; side < 2; ++side) {
      const double dist = side == 0 ? (x0[d] - dom.lo[d]) : (dom.hi[d] - x0[d]);
      // Face mass matrix applied to 1 == per-node face measure.
      std::array<SparseMatrix, 3> parts;
      for (int a = 0; a < N; ++a) {
        if (a == d)
          parts[a] = endpoint_atom(n, side == 0 ? 0 : n);
        else
          parts[a] = mass_1d(dom.extent(a), n);
      }
      SparseMatrix F;
      if (N == 1)
        F = parts[0];
      else if (N == 2)
        F = kron(parts[1], parts[0]);
      else
        F = kron(parts[2], kron(parts[1], parts[0]));
      P += dist * (F * ones);
    }
  }
  return P;
}

Vector restrict_interior(const Discretization& disc, const Vector& full) {
  Vector r(static_cast<Index>(disc.interior_nodes.size()));
  for (size_t i = 0; i < disc.interior_nodes.size(); ++i)
    r[static_cast<Index>(i)] = full[disc.interior_nodes[i]];
  return r;
}

Vector prolong_interior(const Discretization& disc, const Vector& reduced) {
  Vector f = Vector::Zero(disc.num_nodes);
  for (size_t i = 0; i < disc.interior_nodes.size(); ++i)
    f[disc.interior_nodes[i]] = reduced[static_cast<Index>(i)];
  return f;
}

SparseMatrix restrict_matrix(const Discretization& disc,
                             const SparseMatrix& A) {
  std::vector<Index> pos(disc.num_nodes, -1);
  for (size_t i = 0; i < disc.interior_nodes.size(); ++i)
    pos[disc.interior_nodes[i]] = static_cast<Index>(i);
  std::vector<Triplet> t;
  t.reserve(A.nonZeros());
  for (Index k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it)
      if (pos[it.row()] >= 0 && pos[it.col()] >= 0)
        t.emplace_back(pos[it.row()], pos[it.col()], it.value());
  SparseMatrix R(static_cast<Index>(disc.interior_nodes.size()),
                 static_cast<Index>(disc.interior_nodes.size()));
  R.setFromTriplets(t.begin(), t.end());
  return R;
}

namespace {

constexpr uint32_t kCacheMagic = 0x4e43445au;  // "NCDZ"
constexpr uint32_t kCacheVersion = 1;

void write_f64_array(std::ofstream& os, const std::vector<double>& a) {
  const double count = static_cast<double>(a.size());
  os.write(reinterpret_cast<const char*>(&count), sizeof(double));
  os.write(reinterpret_cast<const char*>(a.data()),
           static_cast<std::streamsize>(a.size() * sizeof(double)));
}

std::vector<double> read_f64_array(std::ifstream& is) {
  double count = 0;
  is.read(reinterpret_cast<char*>(&count), sizeof(double));
  std::vector<double> a(static_cast<size_t>(count));
  is.read(reinterpret_cast<char*>(a.data()),
          static_cast<std::streamsize>(a.size() * sizeof(double)));
  if (!is) fail(ErrorCode::IoError, "truncated cache file");
  return a;
}

std::vector<double> matrix_to_f64(const SparseMatrix& A) {
  std::vector<double> t;
  t.reserve(static_cast<size_t>(A.nonZeros()) * 3);
  for (Index k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) {
      t.push_back(static_cast<double>(it.row()));
      t.push_back(static_cast<double>(it.col()));
      t.push_back(it.value());
    }
  return t;
}

SparseMatrix matrix_from_f64(const std::vector<double>& t, Index rows,
                             Index cols) {
  std::vector<Triplet> trip;
  trip.reserve(t.size() / 3);
  for (size_t i = 0; i + 2 < t.size(); i += 3)
    trip.emplace_back(static_cast<Index>(t[i]), static_cast<Index>(t[i + 1]),
                      t[i + 2]);
  SparseMatrix A(rows, cols);
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

}  // namespace

void save_cache(const Discretization& disc, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  const uint32_t header[4] = {kCacheMagic, kCacheVersion,
                              static_cast<uint32_t>(disc.domain.dimension),
                              static_cast<uint32_t>(disc.n_per_axis)};
  os.write(reinterpret_cast<const char*>(header), 16);
  std::vector<double> extents;
  for (int d = 0; d < disc.domain.dimension; ++d) {
    extents.push_back(disc.domain.lo[d]);
    extents.push_back(disc.domain.hi[d]);
  }
  const auto& c = *disc.domain.star_center;
  extents.insert(extents.end(), {c[0], c[1], c[2],
                                 static_cast<double>(disc.domain.kind)});
  write_f64_array(os, extents);
  write_f64_array(os, matrix_to_f64(disc.K));
  write_f64_array(os, matrix_to_f64(disc.M));
  write_f64_array(os, matrix_to_f64(disc.B));
  write_f64_array(os, {disc.P.data(), disc.P.data() + disc.P.size()});
}

Discretization load_cache(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::IoError, "cannot open '" + path + "'");
  uint32_t header[4];
  is.read(reinterpret_cast<char*>(header), 16);
  if (!is || header[0] != kCacheMagic)
    fail(ErrorCode::IoError, "bad cache magic in '" + path + "'");
  if (header[1] != kCacheVersion)
    fail(ErrorCode::IoError, "unsupported cache version");
  const int N = static_cast<int>(header[2]);
  const int n = static_cast<int>(header[3]);
  const auto extents = read_f64_array(is);

  DomainSpec dom;
  dom.kind = static_cast<DomainKind>(static_cast<int>(extents.back()));
  dom.dimension = N;
  for (int d = 0; d < N; ++d) {
    dom.lo[d] = extents[2 * static_cast<size_t>(d)];
    dom.hi[d] = extents[2 * static_cast<size_t>(d) + 1];
  }
  dom.star_center = std::array<double, 3>{extents[2 * static_cast<size_t>(N)],
                                          extents[2 * static_cast<size_t>(N) + 1],
                                          extents[2 * static_cast<size_t>(N) + 2]};
  // Rebuild node bookkeeping, then overwrite the matrices with the cached
  // values so the file remains authoritative bit for bit.
  Discretization disc = assemble(dom, n);
  disc.K = matrix_from_f64(read_f64_array(is), disc.num_nodes, disc.num_nodes);
  disc.M = matrix_from_f64(read_f64_array(is), disc.num_nodes, disc.num_nodes);
  disc.B = matrix_from_f64(read_f64_array(is), disc.num_nodes, disc.num_nodes);
  const auto p = read_f64_array(is);
  disc.P = Eigen::Map<const Vector>(p.data(), static_cast<Index>(p.size()));
  return disc;
}

std::string cache_key(const DomainSpec& domain, int n_per_axis) {
  std::ostringstream os;
  os << domain.describe() << "|n=" << n_per_axis;
  const size_t h = std::hash<std::string>{}(os.str());
  std::ostringstream key;
  key << "disc_" << std::hex << h << "_n" << std::dec << n_per_axis << ".bin";
  return key.str();
}

}  // namespace normcrit
