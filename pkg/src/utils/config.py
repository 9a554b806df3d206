"""Configuration management"""

import os
import yaml
from pathlib import Path
from typing import Dict, Any
from dotenv import load_dotenv


class Config:
    """Configuration manager for solver and simulation settings"""

    def __init__(self, config_dir: str = "config", env_file: str = ".env"):
        """
        Initialize configuration manager.

        Args:
            config_dir: Directory containing YAML config files
            env_file: Path to .env file
        """
        self.config_dir = Path(config_dir)
        self.env_file = Path(env_file)

        # Load environment variables
        if self.env_file.exists():
            load_dotenv(self.env_file)

        # Load YAML configs
        self.solver_config = self._load_yaml("solver.yaml")
        self.simulation_config = self._load_yaml("simulation.yaml")

        # Solver overrides
        self.solver_backend = os.getenv("MARRIAGE_SOLVER_BACKEND")
        self.time_limit = os.getenv("MARRIAGE_TIME_LIMIT")
        self.eps = os.getenv("MARRIAGE_EPS")

        # Logging
        self.log_level = os.getenv("LOG_LEVEL", "INFO")
        self.log_dir = os.getenv("LOG_DIR", "logs")

    def _load_yaml(self, filename: str) -> Dict[str, Any]:
        """Load YAML configuration file"""
        filepath = self.config_dir / filename
        if filepath.exists():
            with open(filepath, 'r') as f:
                return yaml.safe_load(f) or {}
        return {}

    def get_solver_config(self) -> Dict[str, Any]:
        """Get solver options (tolerances, time limit, backend)"""
        settings = dict(self.solver_config.get("solver", {}))
        if self.solver_backend:
            settings["backend"] = self.solver_backend
        if self.time_limit:
            settings["time_limit"] = float(self.time_limit)
        return settings

    def get_rationalize_config(self) -> Dict[str, Any]:
        """Get program-building options (eps, path length cap)"""
        settings = dict(self.solver_config.get("rationalize", {}))
        if self.eps:
            settings["eps"] = float(self.eps)
        return settings

    def get_generator_config(self) -> Dict[str, Any]:
        """Get synthetic market generator parameters"""
        return self.simulation_config.get("generator", {})

    def get_experiment_config(self) -> Dict[str, Any]:
        """Get experiment sweep settings"""
        return self.simulation_config.get("experiment", {})
