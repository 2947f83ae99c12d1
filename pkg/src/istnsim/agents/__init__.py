from .dqn import (DQNAgent, TrainConfig, epsilon_at, select_action, select_actions,
                  td_loss_and_grads, td_train_step)
from .network import Adam, QNetwork, Sgd
from .qlearning import QLAgent, QTable, ql_update, state_key
from .replay import Batch, ReplayMemory
from .training import (CheckpointError, Trainer, TrainMetrics, load_checkpoint,
                       save_checkpoint, train)

__all__ = ["Adam", "Batch", "CheckpointError", "DQNAgent", "QLAgent", "QNetwork", "QTable",
           "ReplayMemory", "Sgd", "TrainConfig", "TrainMetrics", "Trainer", "epsilon_at",
           "load_checkpoint", "ql_update", "save_checkpoint", "select_action", "select_actions",
           "state_key", "td_loss_and_grads", "td_train_step", "train"]
