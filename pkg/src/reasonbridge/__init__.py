"""Bridge-world workbench for reason-guided and reward-shaped moral agents."""
from .agent import AgentBundle, EvalReport, evaluate, run_episode
from .env import BridgeEnv, EnvConfig
from .judge import InteractiveJudge, RuleBasedJudge
from .learning import Hyperparams, RiskModel, TabularQ, MlpQ
from .reasons import DefaultRule, ReasonTheory, proper_scenarios

__all__ = [
    "AgentBundle",
    "BridgeEnv",
    "DefaultRule",
    "EnvConfig",
    "EvalReport",
    "Hyperparams",
    "InteractiveJudge",
    "MlpQ",
    "ReasonTheory",
    "RiskModel",
    "RuleBasedJudge",
    "TabularQ",
    "evaluate",
    "proper_scenarios",
    "run_episode",
]

__version__ = "0.1.0"
