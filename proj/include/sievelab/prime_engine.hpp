#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace sievelab {

enum class SetKind { primes, explicit_list, model_sample };

// Strictly increasing set of positive integers whose membership is known on
// [1, coverage]. Counting functions refuse to look past coverage.
class IntegerSet {
 public:
  IntegerSet() = default;
  IntegerSet(SetKind kind, std::vector<std::uint64_t> sorted, std::uint64_t coverage);

  // Sorts, removes duplicates; coverage defaults to the largest element.
  static IntegerSet from_unsorted(std::vector<std::uint64_t> values, SetKind kind = SetKind::explicit_list);
  static IntegerSet from_unsorted(std::vector<std::uint64_t> values, std::uint64_t coverage,
                                  SetKind kind = SetKind::explicit_list);

  SetKind kind() const { return kind_; }
  std::uint64_t coverage() const { return coverage_; }
  const std::vector<std::uint64_t>& elements() const { return elems_; }
  std::size_t size() const { return elems_.size(); }
  bool empty() const { return elems_.empty(); }

  bool contains(std::uint64_t n) const;
  // Members in (a, b].
  std::size_t count_in(std::uint64_t a, std::uint64_t b) const;
  std::vector<std::uint64_t> range(std::uint64_t a, std::uint64_t b) const;

 private:
  SetKind kind_ = SetKind::explicit_list;
  std::vector<std::uint64_t> elems_;
  std::uint64_t coverage_ = 0;
};

// Upper bound for any sieving request; defaults to 1e10.
void set_max_sieve_limit(std::uint64_t limit);
std::uint64_t max_sieve_limit();

// Segment length used by primes_in; defaults to 2^20 integers.
void set_segment_size(std::uint64_t size);
std::uint64_t segment_size();

// Primes in (a, b] by a segmented sieve. Coverage of the result is b.
IntegerSet primes_in(std::uint64_t a, std::uint64_t b);

// Window [n+1, n+floor(y)] following n. Fractional x counts n <= floor(x).

// M_A(x; y): members n <= x of A whose window holds no member.
std::uint64_t gap_count_M(const IntegerSet& A, double x, double y);

// N_A(x; y, k): positive integers n <= x whose window holds exactly k members.
std::uint64_t interval_count_N(const IntegerSet& A, double x, double y, std::uint64_t k);

// All N_A(x; y, k) at once, indexed by k = 0..floor(y).
std::vector<std::uint64_t> interval_histogram(const IntegerSet& A, double x, double y);

// M_A(x; lambda log x) * log x / (x e^{-lambda}).
double tail_ratio(const IntegerSet& A, double x, double lambda);

struct GapHistogram {
  double x;
  std::vector<double> edges;  // in units of log x, strictly increasing
  std::vector<std::uint64_t> counts;  // counts[i] for gaps/log x in [edges[i], edges[i+1])
  std::uint64_t elements;  // members <= x
};

// Gaps following members n <= x, binned by (next - n) / log x.
GapHistogram gap_histogram(const IntegerSet& A, double x, const std::vector<double>& edges);

// Newline-delimited decimal integers.
void write_integer_list(std::ostream& out, const IntegerSet& A);
IntegerSet read_integer_list(std::istream& in, SetKind kind = SetKind::explicit_list);

}  // namespace sievelab
