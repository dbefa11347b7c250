import pytest

from qdshuttle.array import (
    ArrayConfig,
    Dot,
    adjacency,
    adjacency_predicates,
    block_control,
    build_standard_array,
    seat_dots,
)
from qdshuttle.errors import InvalidConfig, InvalidDimensions, NotAdjacent, UnknownElectron


class TestStandardArray:
    def test_seat_count(self, std):
        assert len(seat_dots(std)) == 56

    def test_aisles_are_even_columns(self, std):
        assert std.r_columns == frozenset(range(2, 17, 2))

    def test_seats_avoid_aisles_and_bus(self, std):
        assert all(d.col % 2 == 1 and d.row != 4 for d in std.seats)

    def test_vertical_channels_only_in_aisles(self, std):
        assert std.has_channel(Dot(1, 2), Dot(2, 2))
        assert not std.has_channel(Dot(1, 3), Dot(2, 3))

    def test_horizontal_channels_everywhere(self, std):
        assert all(std.has_channel(Dot(r, c), Dot(r, c + 1)) for r in range(1, 9) for c in range(1, 16))

    def test_measure_column_is_rightmost(self, std):
        assert std.measure_col == 16

    @pytest.mark.parametrize("dims", [(8, 15, 4), (2, 16, 1), (8, 16, 1), (8, 16, 8)])
    def test_bad_dimensions(self, dims):
        with pytest.raises(InvalidDimensions):
            build_standard_array(*dims)

    def test_small_array_seats(self, small):
        assert len(small.seats) == 12

    def test_json_round_trip(self, std):
        assert ArrayConfig.from_json(std.to_json()) == std

    def test_explicit_channels_round_trip(self):
        cfg = ArrayConfig.from_json({"rows": 2, "cols": 2, "bus_row": 1, "r_columns": [], "channels": [[[1, 1], [1, 2]]]})
        assert ArrayConfig.from_json(cfg.to_json()) == cfg

    def test_rejects_long_channel(self):
        with pytest.raises(InvalidConfig):
            ArrayConfig.from_json({"rows": 2, "cols": 3, "bus_row": 1, "channels": [[[1, 1], [1, 3]]]})


class TestAdjacency:
    def test_horizontal(self, std):
        adj = adjacency(std, Dot(1, 1), Dot(1, 2))
        assert adj.adj_hor and adj.same_row and not adj.adj_ver

    def test_vertical_needs_row_gate(self, std):
        assert adjacency(std, Dot(3, 2), Dot(4, 2)).adj_ver
        assert not adjacency(std, Dot(3, 3), Dot(4, 3)).adj_ver

    def test_distance_two_is_not_adjacent(self, std):
        adj = adjacency(std, Dot(1, 1), Dot(1, 3))
        assert adj.same_row and not adj.adj_hor

    def test_predicates_from_placement(self, std):
        assert adjacency_predicates(std, {0: Dot(4, 2), 1: Dot(5, 2)}, 0, 1).adj_ver

    def test_unknown_electron(self, std):
        with pytest.raises(UnknownElectron):
            adjacency_predicates(std, {0: Dot(1, 1)}, 0, 7)


class TestBlockControl:
    def test_seat_to_aisle(self, std):
        assert block_control(std, set(), Dot(1, 1), Dot(1, 2))

    def test_occupied_destination(self, std):
        assert not block_control(std, {Dot(1, 2)}, Dot(1, 1), Dot(1, 2))

    def test_same_kind_columns(self):
        cfg = ArrayConfig.from_json({"rows": 2, "cols": 2, "bus_row": 1, "r_columns": [], "channels": [[[1, 1], [1, 2]]]})
        assert not block_control(cfg, set(), Dot(1, 1), Dot(1, 2))

    def test_not_adjacent(self, std):
        with pytest.raises(NotAdjacent):
            block_control(std, set(), Dot(1, 1), Dot(2, 2))
