#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace forge {

/// The five spectrum positions, ordered left to right.
enum class Position { PL = 1, LW = 2, C = 3, RW = 4, CR = 5 };

inline constexpr std::array<Position, 5> kAllPositions = {
    Position::PL, Position::LW, Position::C, Position::RW, Position::CR};

constexpr int ordinal(Position p) noexcept { return static_cast<int>(p); }

/// Inverse of ordinal(); nullopt outside 1..5.
constexpr std::optional<Position> position_from_ordinal(int ord) noexcept {
  if (ord < 1 || ord > 5) return std::nullopt;
  return static_cast<Position>(ord);
}

constexpr int distance(Position a, Position b) noexcept {
  const int d = ordinal(a) - ordinal(b);
  return d < 0 ? -d : d;
}

std::string_view to_string(Position p) noexcept;
std::optional<Position> parse_position(std::string_view text) noexcept;

/// Coarse stage-one grouping used by the two-stage training plan.
enum class Leaning { Left, Center, Right };

std::string_view to_string(Leaning l) noexcept;
std::optional<Leaning> parse_leaning(std::string_view text) noexcept;

/// PL/LW train under Left, RW/CR under Right, C under Center.
constexpr Leaning parent_leaning(Position p) noexcept {
  switch (p) {
    case Position::PL:
    case Position::LW: return Leaning::Left;
    case Position::C: return Leaning::Center;
    case Position::RW:
    case Position::CR: return Leaning::Right;
  }
  return Leaning::Center;
}

}  // namespace forge
