"""Multi-item auctions over social networks via graph-exploration meta-mechanisms."""
from .classical import (DNS, LOS, MPA, BruteVCG, CoinRecord, Group, Mechanism, MechanismError,
                        Outcome, SecondPrice, revenue, sw, utility)
from .lpsolve import ConfigLP, LPError, LPSolution, build_config_lp, fractional_optimum, solve
from .meta import MetaTrace, check_termination_state, meta_msn, meta_msn_m
from .netgraph import GlobalProfile, Profile, SocialNetwork, load_edge_list, read_edge_list, star
from .valuation import (Coverage, ExplicitTable, SingleMinded, SqrtAdditive, UnitDemand,
                        Valuation, ValuationModelConfig, bundle, bundle_of, full_bundle)

__all__ = [
    "DNS", "LOS", "MPA", "BruteVCG", "CoinRecord", "Group", "Mechanism", "MechanismError",
    "Outcome", "SecondPrice", "revenue", "sw", "utility",
    "ConfigLP", "LPError", "LPSolution", "build_config_lp", "fractional_optimum", "solve",
    "MetaTrace", "check_termination_state", "meta_msn", "meta_msn_m",
    "GlobalProfile", "Profile", "SocialNetwork", "load_edge_list", "read_edge_list", "star",
    "Coverage", "ExplicitTable", "SingleMinded", "SqrtAdditive", "UnitDemand", "Valuation",
    "ValuationModelConfig", "bundle", "bundle_of", "full_bundle",
]
