import os
from typing import Optional
from dotenv import load_dotenv

load_dotenv()


def get_my_env_var(var_name: str, default: Optional[str] = None) -> str:
    """
    Retrieves the value of the given environment variable.
    :param var_name: The name of the environment variable to retrieve.
    :param default: The value to return when the variable is not set.
    :return: The value of the given environment variable.
    :raises MissingEnvironmentVariable: If the given environment variable does not exist and has no default.
    """
    try:
        return os.environ[var_name]
    except KeyError as e:
        if default is not None:
            return default
        raise MissingEnvironmentVariable(f"{var_name} does not exist") from e


def get_int_env_var(var_name: str, default: int) -> int:
    return int(get_my_env_var(var_name, str(default)))


class MissingEnvironmentVariable(Exception):
    pass


class BalancerError(Exception):
    exit_code: int = 3


class InputError(BalancerError):
    exit_code: int = 2


class InstanceTooLarge(InputError):
    pass


class OnlineProtocolError(InputError):
    pass


class InvariantViolation(BalancerError):
    exit_code: int = 3


EXIT_SUCCESS: int = 0
EXIT_NEGATIVE: int = 1

LOG_LEVEL: str = get_my_env_var("LOG_LEVEL", "INFO")
ORACLE_LIMIT_N: int = get_int_env_var("ORACLE_LIMIT_N", 12)
NAE_LIMIT_VARS: int = get_int_env_var("NAE_LIMIT_VARS", 24)
DECIDER_LIMIT_N: int = get_int_env_var("DECIDER_LIMIT_N", 400)
MULTI_INTERVAL_LIMIT_GROUPS: int = get_int_env_var("MULTI_INTERVAL_LIMIT_GROUPS", 20)
ONLINE_BUDGET_FACTOR: int = get_int_env_var("ONLINE_BUDGET_FACTOR", 2)
SEARCH_CHUNK: int = get_int_env_var("SEARCH_CHUNK", 65536)

DECIMAL_DENOMINATOR_PRIMES: tuple = (2, 5)
