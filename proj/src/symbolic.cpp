#include "incdim/symbolic.hpp"

#include <cmath>
#include <ostream>

#include "incdim/numeric.hpp"

namespace incdim {

std::vector<int> project(std::span<const Digit> word) {
  std::vector<int> out;
  out.reserve(word.size());
  for (Digit d : word) out.push_back(d.row);
  return out;
}

namespace {

double log_a_sum(const INCSystem& system, std::span<const Digit> word) {
  NeumaierSum s;
  for (Digit d : word) s.add(std::log(system.a(d)));
  return s.value();
}

int vertical_at(std::span<const Digit> word, std::span<const int> extension, std::size_t pos) {
  return pos < word.size() ? word[pos].row : extension[pos - word.size()];
}

}  // namespace

int l_index(const INCSystem& system, std::span<const Digit> word, std::span<const int> extension) {
  if (word.empty()) throw std::invalid_argument("l_index needs a nonempty word");
  const double threshold = log_a_sum(system, word);
  const double slack = kContainmentSlack * std::max(1.0, std::fabs(threshold));
  NeumaierSum s;
  const std::size_t available = word.size() + extension.size();
  for (std::size_t l = 1; l <= available; ++l) {
    s.add(std::log(system.b(vertical_at(word, extension, l - 1))));
    if (l >= word.size() && s.value() <= threshold + slack) return static_cast<int>(l);
  }
  throw Error("vertical extension of length " + std::to_string(extension.size()) +
              " exhausted before the fiber threshold was met; supply a longer word");
}

Interval horizontal_image(const INCSystem& system, std::span<const Digit> word) {
  Interval in = kUnitInterval;
  for (std::size_t k = word.size(); k-- > 0;) in = image(system.horizontal_branch(word[k]), in);
  return in;
}

Interval vertical_image(const INCSystem& system, std::span<const int> vertical_word) {
  Interval in = kUnitInterval;
  for (std::size_t k = vertical_word.size(); k-- > 0;) {
    in = image(system.vertical_branch(vertical_word[k]), in);
  }
  return in;
}

CoverRectangle approximate_square(const INCSystem& system, std::span<const Digit> word,
                                  std::span<const int> extension) {
  const int L = l_index(system, word, extension);
  std::vector<int> vertical = project(word);
  vertical.insert(vertical.end(), extension.begin(),
                  extension.begin() + (L - static_cast<int>(word.size())));
  return {horizontal_image(system, word), vertical_image(system, vertical),
          static_cast<int>(word.size()), L};
}

double ratio_check(const INCSystem& system, std::span<const Digit> word,
                   std::span<const int> extension, int L) {
  if (L < static_cast<int>(word.size()) ||
      L > static_cast<int>(word.size() + extension.size())) {
    throw std::invalid_argument("ratio_check: L outside the available vertical digits");
  }
  NeumaierSum s;
  for (Digit d : word) s.add(std::log(system.a(d)));
  for (int l = 0; l < L; ++l) {
    s.add(-std::log(system.b(vertical_at(word, extension, static_cast<std::size_t>(l)))));
  }
  return std::exp(s.value());
}

std::pair<double, double> coding_point(const INCSystem& system, std::span<const Digit> word) {
  double x = 0.5;
  double y = 0.5;
  for (std::size_t k = word.size(); k-- > 0;) {
    x = incdim::apply(system.horizontal_branch(word[k]), x);
    y = incdim::apply(system.vertical_branch(word[k].row), y);
  }
  return {x, y};
}

void write_rectangles(std::ostream& out, std::span<const CoverRectangle> rects) {
  for (const CoverRectangle& r : rects) {
    out << fmt17(r.h.lo) << ' ' << fmt17(r.h.hi) << ' ' << fmt17(r.v.lo) << ' '
        << fmt17(r.v.hi) << '\n';
  }
}

}  // namespace incdim
