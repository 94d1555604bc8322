#include "forge/position.hpp"

namespace forge {

std::string_view to_string(Position p) noexcept {
  switch (p) {
    case Position::PL: return "PL";
    case Position::LW: return "LW";
    case Position::C: return "C";
    case Position::RW: return "RW";
    case Position::CR: return "CR";
  }
  return "?";
}

std::optional<Position> parse_position(std::string_view text) noexcept {
  for (Position p : kAllPositions) {
    if (to_string(p) == text) return p;
  }
  return std::nullopt;
}

std::string_view to_string(Leaning l) noexcept {
  switch (l) {
    case Leaning::Left: return "Left";
    case Leaning::Center: return "Center";
    case Leaning::Right: return "Right";
  }
  return "?";
}

std::optional<Leaning> parse_leaning(std::string_view text) noexcept {
  if (text == "Left") return Leaning::Left;
  if (text == "Center") return Leaning::Center;
  if (text == "Right") return Leaning::Right;
  return std::nullopt;
}

}  // namespace forge
