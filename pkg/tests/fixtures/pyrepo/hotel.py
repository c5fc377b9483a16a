class Hotel:
    """Rooms, bookings, and guest reviews for one property."""

    def __init__(self, name, rooms):
        self.name = name
        self.rooms = rooms
        self._reviews = []

    def book(self, room_type, number, guest):
        if number <= self.rooms:
            return "Success!"
        return "No vacancy"

    def reviews(self):
        return list(self._reviews)

    def add_review(self, review):
        self._reviews.append(review)
