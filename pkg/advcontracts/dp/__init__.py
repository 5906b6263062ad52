# flake8:noqa
from .dataset import Dataset, read_dataset
from .ledger import BudgetLedger
from .mechanism import Query, answer_query, exact_answer, laplace_mechanism, laplace_noise, sensitivity
