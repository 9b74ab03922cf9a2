import pytest

from relaxnet.couplings import lwr_counterpart, parse_coupling


class TestParse:
    @pytest.mark.parametrize(
        "text, name, params, model, topology",
        [("merge_flux_ratio", "merge_flux_ratio", (), "relaxation", "merge"),
         ("merge_priority(0.5)", "merge_priority", (0.5,), "relaxation", "merge"),
         (" diverge_alpha( 0.3 ) ", "diverge_alpha", (0.3,), "relaxation", "diverge"),
         ("lwr_adaptive", "lwr_adaptive", (), "lwr", "diverge")],
    )
    def test_valid(self, text, name, params, model, topology):
        c = parse_coupling(text)
        assert (c.name, c.params, c.model, c.topology) == (name, params, model, topology)

    @pytest.mark.parametrize("text", ["bogus", "merge_priority", "merge_priority(2)", "diverge_alpha(1)",
                                      "merge_flux_ratio(1)", "diverge_alpha(x)"])
    def test_invalid(self, text):
        with pytest.raises(ValueError):
            parse_coupling(text)

    def test_descriptor_round_trip(self):
        c = parse_coupling("merge_priority(0.25)")
        assert parse_coupling(c.descriptor).params == c.params


class TestCounterpart:
    @pytest.mark.parametrize(
        "relax, lwr",
        [("merge_flux_ratio", "lwr_fair"), ("merge_priority(0)", "lwr_priority"),
         ("merge_priority(0.5)", "lwr_fair"), ("diverge_alpha(0.3)", "lwr_alpha"),
         ("diverge_adaptive", "lwr_adaptive")],
    )
    def test_mapping(self, relax, lwr):
        assert lwr_counterpart(parse_coupling(relax)).name == lwr

    def test_alpha_carried(self):
        assert lwr_counterpart(parse_coupling("diverge_alpha(0.3)")).params == (0.3,)

    def test_partial_priority_has_no_default(self):
        with pytest.raises(ValueError):
            lwr_counterpart(parse_coupling("merge_priority(0.3)"))
