# Standard library imports
import logging
from concurrent.futures import ThreadPoolExecutor

logger = logging.getLogger(__name__)


def ordered_map(func, items, workers=1):
    """
    Применяет func к элементам items, сохраняя порядок результатов.

    При workers > 1 задачи выполняются в пуле потоков; вывод не зависит
    от числа потоков.
    """
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [func(item) for item in items]
    logger.debug('ordered_map: %d задач, %d потоков', len(items), workers)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))
