class Payment:
    """A chargeable payment instrument."""

    def __init__(self, method, amount):
        self.method = method
        self.amount = amount

    def charge(self, payer):
        return self.amount > 0
