#include "spw/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "spw/error.hpp"
#include "spw/io.hpp"
#include "spw/kernels.hpp"

namespace spw {

SpikeSpec::SpikeSpec(std::size_t m, std::size_t n, std::vector<double> spikes)
    : m_(m), n_(n), spikes_(std::move(spikes)) {
  if (m_ == 0 || n_ == 0) throw DomainError("m and n must be positive");
  if (spikes_.empty()) spikes_ = {1.0};
  if (spikes_.size() > m_) {
    throw DomainError("number of spikes (" + std::to_string(spikes_.size()) + ") exceeds m (" +
                      std::to_string(m_) + ")");
  }
  for (double s : spikes_) {
    if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("spikes must be positive and finite");
  }
}

std::size_t SpikeSpec::block_rows() const noexcept { return std::min(m_, n_ + k()); }
std::size_t SpikeSpec::block_cols() const noexcept { return std::min(m_, n_); }

SpikeSpec SpikeSpec::with_spikes(std::vector<double> spikes) const {
  if (spikes.size() != k()) throw DomainError("spike count must stay " + std::to_string(k()));
  return SpikeSpec(m_, n_, std::move(spikes));
}

std::optional<EntryLaw> entry_law(const SpikeSpec& spec, std::size_t i, std::size_t j) noexcept {
  if (i >= spec.m() || j >= spec.n() || j > i || i - j > spec.k()) return std::nullopt;
  const std::size_t t = i - j;
  if (t == 0) return EntryLaw{EntryKind::chi_diag, static_cast<std::int64_t>(spec.n() - i)};
  if (t == spec.k()) return EntryLaw{EntryKind::chi_sub, static_cast<std::int64_t>(spec.m() - i)};
  return EntryLaw{EntryKind::normal, 0};
}

// --- BandedSample ----------------------------------------------------------

BandedSample::BandedSample(SpikeSpec spec, std::vector<double> unit, std::vector<double> values)
    : spec_(std::move(spec)),
      rows_(spec_.block_rows()),
      cols_(spec_.block_cols()),
      unit_(std::move(unit)),
      values_(std::move(values)) {}

BandedSample::BandedSample(SpikeSpec spec, const NoiseRecord& noise)
    : spec_(std::move(spec)), rows_(spec_.block_rows()), cols_(spec_.block_cols()) {
  if (noise.m != spec_.m() || noise.n != spec_.n() || noise.k != spec_.k()) {
    throw DomainError("noise record shape (" + std::to_string(noise.m) + ", " + std::to_string(noise.n) + ", " +
                      std::to_string(noise.k) + ") does not match spec");
  }
  std::size_t total = 0;
  for (std::size_t t = 0; t <= k(); ++t) total += band_length(t);
  if (noise.values.size() != total) {
    throw DomainError("noise record holds " + std::to_string(noise.values.size()) + " values, expected " +
                      std::to_string(total));
  }
  unit_ = noise.values;
  values_.resize(total);
  for (std::size_t t = 0, pos = 0; t <= k(); ++t) {
    for (std::size_t j = 0; j < band_length(t); ++j, ++pos) values_[pos] = spec_.sigma(j + t) * unit_[pos];
  }
}

BandedSample BandedSample::from_dense(SpikeSpec spec, std::span<const double> dense) {
  const std::size_t m = spec.m(), n = spec.n();
  if (dense.size() != m * n) throw DomainError("dense fixture has wrong size");
  const std::size_t rows = spec.block_rows(), cols = spec.block_cols(), k = spec.k();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (dense[i * n + j] != 0.0 && !entry_law(spec, i, j)) {
        throw DomainError("fixture entry (" + std::to_string(i) + ", " + std::to_string(j) + ") is outside the band");
      }
    }
  }
  std::vector<double> unit, values;
  for (std::size_t t = 0; t <= k && t < rows; ++t) {
    for (std::size_t j = 0; j < std::min(cols, rows - t); ++j) {
      const double v = dense[(j + t) * n + j];
      values.push_back(v);
      unit.push_back(v / spec.sigma(j + t));
    }
  }
  return BandedSample(std::move(spec), std::move(unit), std::move(values));
}

std::size_t BandedSample::band_length(std::size_t t) const noexcept {
  if (t > k() || t >= rows_) return 0;
  return std::min(cols_, rows_ - t);
}

std::size_t BandedSample::offset(std::size_t t) const noexcept {
  std::size_t off = 0;
  for (std::size_t s = 0; s < t; ++s) off += band_length(s);
  return off;
}

std::span<const double> BandedSample::band(std::size_t t) const noexcept {
  return std::span<const double>(values_).subspan(offset(t), band_length(t));
}

std::span<const double> BandedSample::unit_band(std::size_t t) const noexcept {
  return std::span<const double>(unit_).subspan(offset(t), band_length(t));
}

double BandedSample::at(std::size_t i, std::size_t j) const noexcept {
  if (j > i) return 0.0;
  const std::size_t t = i - j;
  if (j >= band_length(t)) return 0.0;
  return values_[offset(t) + j];
}

std::optional<EntryLaw> BandedSample::law(std::size_t i, std::size_t j) const noexcept {
  return entry_law(spec_, i, j);
}

NoiseRecord BandedSample::noise() const { return NoiseRecord{m(), n(), k(), unit_}; }

std::vector<double> BandedSample::to_dense() const {
  std::vector<double> dense(m() * n(), 0.0);
  for (std::size_t t = 0, pos = 0; t <= k(); ++t) {
    for (std::size_t j = 0; j < band_length(t); ++j, ++pos) dense[(j + t) * n() + j] = values_[pos];
  }
  return dense;
}

// --- samplers ----------------------------------------------------------------

BandedSample sample_banded(const SpikeSpec& spec, RandomStream& stream, const SampleOptions& options) {
  NoiseRecord noise{spec.m(), spec.n(), spec.k(), {}};
  const std::size_t rows = spec.block_rows(), cols = spec.block_cols();
  for (std::size_t t = 0; t <= spec.k() && t < rows; ++t) {
    const std::size_t len = std::min(cols, rows - t);
    for (std::size_t j = 0; j < len; ++j) {
      const EntryLaw law = *entry_law(spec, j + t, j);
      if (law.kind == EntryKind::normal) {
        noise.values.push_back(stream.normal());
      } else {
        const std::int64_t df = std::max<std::int64_t>(0, law.df + options.df_shift);
        noise.values.push_back(df == 0 ? 0.0 : sample_chi(stream, df));
      }
    }
  }
  return BandedSample(spec, noise);
}

DenseSample sample_dense(const SpikeSpec& spec, RandomStream& stream) {
  DenseSample g{spec, {}};
  const std::size_t m = spec.m(), n = spec.n();
  g.values.resize(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    double* row = g.values.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) row[j] = stream.normal();
    if (i < spec.k()) kernels::scal(spec.sigma(i), row, n);
  }
  return g;
}

// --- serialization -----------------------------------------------------------

namespace {

std::string kind_token(const EntryLaw& law) {
  switch (law.kind) {
    case EntryKind::chi_diag:
      return "chi_diag(" + std::to_string(law.df) + ")";
    case EntryKind::chi_sub:
      return "chi_sub(" + std::to_string(law.df) + ")";
    case EntryKind::normal:
      return "normal";
  }
  return "?";
}

}  // namespace

void write_triplets(std::ostream& os, const BandedSample& h) {
  os << "# m=" << h.m() << " n=" << h.n() << " spikes=";
  for (std::size_t r = 0; r < h.k(); ++r) os << (r ? "," : "") << io::format_double(h.spec().sigma(r));
  os << "\ni,j,value,kind\n";
  for (std::size_t t = 0; t <= h.k(); ++t) {
    const auto band = h.band(t);
    for (std::size_t j = 0; j < band.size(); ++j) {
      os << (j + t + 1) << ',' << (j + 1) << ',' << io::format_double(band[j]) << ','
         << kind_token(*h.law(j + t, j)) << '\n';
    }
  }
}

BandedSample read_triplets(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# ", 0) != 0) throw DomainError("missing triplet spec line");
  std::size_t m = 0, n = 0;
  std::vector<double> spikes;
  {
    std::istringstream ss(line.substr(2));
    std::string field;
    while (ss >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) throw DomainError("bad spec field '" + field + "'");
      const std::string key = field.substr(0, eq), value = field.substr(eq + 1);
      if (key == "m") m = static_cast<std::size_t>(io::parse_double(value));
      else if (key == "n") n = static_cast<std::size_t>(io::parse_double(value));
      else if (key == "spikes") spikes = io::parse_double_list(value);
      else throw DomainError("unknown spec field '" + key + "'");
    }
  }
  SpikeSpec spec(m, n, spikes);
  if (!std::getline(is, line)) throw DomainError("missing triplet header");
  std::vector<double> dense(m * n, 0.0);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto fields = io::split_csv_line(line);
    if (fields.size() != 4) throw DomainError("triplet line needs 4 fields: '" + line + "'");
    const auto i = static_cast<std::size_t>(io::parse_double(fields[0]));
    const auto j = static_cast<std::size_t>(io::parse_double(fields[1]));
    if (i < 1 || j < 1 || i > m || j > n) throw DomainError("triplet index out of range: '" + line + "'");
    const auto law = entry_law(spec, i - 1, j - 1);
    if (!law || kind_token(*law) != fields[3]) throw DomainError("triplet kind mismatch: '" + line + "'");
    dense[(i - 1) * n + (j - 1)] = io::parse_double(fields[2]);
  }
  return BandedSample::from_dense(std::move(spec), dense);
}

void write_dense_csv(std::ostream& os, const BandedSample& h) {
  const auto dense = h.to_dense();
  for (std::size_t i = 0; i < h.m(); ++i) {
    for (std::size_t j = 0; j < h.n(); ++j) {
      if (j) os << ',';
      os << io::format_double(dense[i * h.n() + j]);
    }
    os << '\n';
  }
}

}  // namespace spw
