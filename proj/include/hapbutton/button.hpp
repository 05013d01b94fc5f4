#pragma once

#include <array>
#include <string>
#include <string_view>

namespace hapbutton {

enum class ButtonType { Latch, Toggle, Push };

inline constexpr std::array<ButtonType, 3> all_buttons{ButtonType::Latch, ButtonType::Toggle,
                                                       ButtonType::Push};

std::string_view to_string(ButtonType button);
ButtonType button_from_string(std::string_view name);

/// Push is momentary; Latch and Toggle keep their state after release.
constexpr bool is_momentary(ButtonType button) { return button == ButtonType::Push; }

constexpr std::size_t index_of(ButtonType button) { return static_cast<std::size_t>(button); }

}  // namespace hapbutton
