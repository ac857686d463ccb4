#pragma once

#include <compare>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nerbreaker {

using Tokens = std::vector<std::string>;

enum class LabelKind { Outside, Begin, Inside };

/// IOB tag. Outside carries no entity type; Begin/Inside always carry one.
class Label {
 public:
  Label() = default;

  static Label outside() { return Label(); }
  static Label begin(std::string type);
  static Label inside(std::string type);

  /// Parses "O", "B-<TYPE>" or "I-<TYPE>". The type is everything after the
  /// first hyphen, so "B-creative-work" has type "creative-work".
  static Label parse(std::string_view text);

  LabelKind kind() const { return kind_; }
  const std::string& type() const { return type_; }
  bool is_outside() const { return kind_ == LabelKind::Outside; }

  std::string str() const;

  bool operator==(const Label&) const = default;

  /// Canonical order: "O" first, then the serialized forms lexicographically.
  /// Argmax ties resolve to the earliest label in this order.
  std::strong_ordering operator<=>(const Label& other) const;

 private:
  Label(LabelKind kind, std::string type) : kind_(kind), type_(std::move(type)) {}

  LabelKind kind_ = LabelKind::Outside;
  std::string type_;
};

using Labels = std::vector<Label>;

class LabelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nerbreaker
